//! Decides the three soundness conditions on explicit state spaces.
//!
//! 1. option to complete: from every reachable marking the final marking
//!    stays reachable;
//! 2. proper completion: every reachable marking with at least `k` tokens
//!    in the sink equals the final marking;
//! 3. no dead transitions: every transition of the closure net `N*` fires
//!    in some reachable marking of `N*`.
//!
//! Condition 1 is the state-space reading of "eventually terminate". It is
//! weaker than the LTL formula `<> term` on nets with cycles, where an
//! infinite run may avoid the sink forever while completion stays possible.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::petri::{Marking, Net, NetError, Tokens};
use crate::statespace::coverability::coverability;
use crate::statespace::graph::{explore, ExploreError, ReachabilityGraph, Status, Trace};
use crate::wfnet::{closure, WfError, WfNet, WfrNet, Workflow};

/// Default bound on the number of explored markings.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("condition requires a complete state space, exploration ended with {0:?}")]
    Incomplete(Status),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Workflow(#[from] WfError),
}

impl From<NetError> for CheckError {
    fn from(e: NetError) -> Self {
        CheckError::Explore(ExploreError::Net(e))
    }
}

/// Pass/fail for conditions 1 and 2, with a counterexample on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionOutcome {
    pub pass: bool,
    pub counterexample: Option<Trace>,
}

/// Pass/fail for condition 3 with the dead transitions of `N*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadTransitions {
    pub pass: bool,
    pub dead: Vec<usize>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoundnessResult {
    Sound,
    WeakSound,
    Unsound,
    Unbounded,
    Inconclusive { cap: usize },
}

impl SoundnessResult {
    pub fn as_str(&self) -> &'static str {
        match self {
            SoundnessResult::Sound => "sound",
            SoundnessResult::WeakSound => "weak_sound",
            SoundnessResult::Unsound => "unsound",
            SoundnessResult::Unbounded => "unbounded",
            SoundnessResult::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// An unboundedness witness resolved to markings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundWitness {
    /// Whether the witness was found in `N*` rather than `N`.
    pub in_closure: bool,
    pub ancestor: Marking,
    pub descendant: Marking,
    pub trace: Trace,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub edges: usize,
    pub closure_nodes: usize,
    pub closure_edges: usize,
    pub elapsed: Duration,
}

/// Structured soundness verdict.
///
/// A condition is `None` when exploration did not finish and the condition
/// could not be decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub result: SoundnessResult,
    pub termination: Option<ConditionOutcome>,
    pub proper: Option<ConditionOutcome>,
    pub no_dead: Option<DeadTransitions>,
    pub witness: Option<BoundWitness>,
    pub stats: Stats,
    pub k: Tokens,
    pub resources: Vec<(String, Tokens)>,
    pub initial: Marking,
    pub final_marking: Marking,
    /// Place identifiers, indexing every marking in the verdict.
    pub places: Vec<String>,
}

impl Verdict {
    /// Conditions 1 and 2 both hold.
    pub fn weakly_sound(&self) -> bool {
        let pass = |c: &Option<ConditionOutcome>| c.as_ref().is_some_and(|c| c.pass);
        pass(&self.termination) && pass(&self.proper)
    }
}

fn require_complete(g: &ReachabilityGraph) -> Result<(), CheckError> {
    if g.is_complete() {
        Ok(())
    } else {
        Err(CheckError::Incomplete(g.status().clone()))
    }
}

/// Option to complete: every node can reach `mf`. The counterexample is a
/// shortest trace to the first node (in discovery order) that cannot.
pub fn check_termination(g: &ReachabilityGraph, mf: &Marking) -> Result<ConditionOutcome, CheckError> {
    require_complete(g)?;
    let n = g.node_count();
    let mut reaches = vec![false; n];
    if let Some(target) = g.index_of(mf) {
        let mut incoming = vec![Vec::new(); n];
        for e in g.edges() {
            incoming[e.to].push(e.from);
        }
        reaches[target] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &u in &incoming[v] {
                if !reaches[u] {
                    reaches[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    Ok(match reaches.iter().position(|&r| !r) {
        None => ConditionOutcome {
            pass: true,
            counterexample: None,
        },
        Some(bad) => ConditionOutcome {
            pass: false,
            counterexample: Some(g.shortest_trace(bad)),
        },
    })
}

/// Proper completion: every node with at least `k` tokens in `sink` equals
/// `mf`.
pub fn check_proper(
    g: &ReachabilityGraph,
    sink: usize,
    k: Tokens,
    mf: &Marking,
) -> Result<ConditionOutcome, CheckError> {
    require_complete(g)?;
    let bad = g.markings().position(|m| m.get(sink) >= k && m != mf);
    Ok(ConditionOutcome {
        pass: bad.is_none(),
        counterexample: bad.map(|b| g.shortest_trace(b)),
    })
}

/// No dead transitions: every transition of `net_star` labels an edge of
/// `g_star`.
pub fn check_no_dead(net_star: &Net, g_star: &ReachabilityGraph) -> Result<DeadTransitions, CheckError> {
    require_complete(g_star)?;
    Ok(dead_transitions(net_star, g_star))
}

fn dead_transitions(net: &Net, g: &ReachabilityGraph) -> DeadTransitions {
    let dead: Vec<usize> = g
        .fired_transitions()
        .iter()
        .enumerate()
        .filter(|(_, &fired)| !fired)
        .map(|(t, _)| t)
        .collect();
    DeadTransitions {
        pass: dead.is_empty(),
        names: dead.iter().map(|&t| net.transition_name(t).to_string()).collect(),
        dead,
    }
}

/// Condition 3 when `g` may be partial. A transition seen firing is not
/// dead however exploration ended, so an all-fired partial graph passes.
/// Otherwise an incomplete graph is settled on the coverability graph of
/// the same net; `None` means that graph hit the cap as well.
fn no_dead_partial(net: &Net, g: &ReachabilityGraph, m0: &Marking, cap: usize) -> Option<DeadTransitions> {
    let outcome = dead_transitions(net, g);
    if outcome.pass || g.is_complete() {
        return Some(outcome);
    }
    let cov = coverability(net, m0, cap);
    if !cov.complete {
        return None;
    }
    let dead: Vec<usize> = (0..net.transition_count()).filter(|&t| !cov.fired[t]).collect();
    Some(DeadTransitions {
        pass: dead.is_empty(),
        names: dead.iter().map(|&t| net.transition_name(t).to_string()).collect(),
        dead,
    })
}

/// Soundness for one instance.
pub fn check_soundness(wf: &WfNet, cap: usize) -> Result<Verdict, CheckError> {
    check_workflow(wf, 1, cap)
}

/// Soundness for `k` instances, with final marking `k·f`.
pub fn check_k_soundness(wf: &WfNet, k: Tokens, cap: usize) -> Result<Verdict, CheckError> {
    check_workflow(wf, k, cap)
}

/// (k,R)-soundness: initial marking `k·i + R`, final marking `k·f + R`.
pub fn check_kr_soundness(wfr: &WfrNet, k: Tokens, cap: usize) -> Result<Verdict, CheckError> {
    check_workflow(wfr, k, cap)
}

/// Shared driver for all soundness variants.
pub fn check_workflow<W: Workflow>(w: &W, k: Tokens, cap: usize) -> Result<Verdict, CheckError> {
    let started = Instant::now();
    let wf = w.wfnet();
    let net = wf.net();
    let m0 = w.initial_marking(k)?;
    let mf = w.final_marking(k)?;

    let g = explore(net, &m0, cap)?;
    let star = closure(wf);
    let g_star = explore(&star.net, &m0, cap)?;

    let (termination, proper) = if g.is_complete() {
        (
            Some(check_termination(&g, &mf)?),
            Some(check_proper(&g, wf.sink(), k, &mf)?),
        )
    } else {
        (None, None)
    };
    let no_dead = no_dead_partial(&star.net, &g_star, &m0, cap);

    let witness_of = |graph: &ReachabilityGraph, in_closure| match graph.status() {
        Status::Unbounded(w) => Some(BoundWitness {
            in_closure,
            ancestor: graph.marking(w.ancestor).clone(),
            descendant: w.descendant.clone(),
            trace: graph.witness_trace(w),
        }),
        _ => None,
    };
    let passes = |c: &Option<ConditionOutcome>| c.as_ref().map(|c| c.pass);

    let (result, witness) = match g.status() {
        Status::Unbounded(_) => (SoundnessResult::Unbounded, witness_of(&g, false)),
        Status::CapExceeded(cap) => (SoundnessResult::Inconclusive { cap: *cap }, None),
        Status::Complete => match (passes(&termination), passes(&proper)) {
            (Some(true), Some(true)) => match &no_dead {
                Some(d) if d.pass => (SoundnessResult::Sound, None),
                Some(_) => (SoundnessResult::WeakSound, None),
                None => (SoundnessResult::Inconclusive { cap }, witness_of(&g_star, true)),
            },
            _ => (SoundnessResult::Unsound, None),
        },
    };

    Ok(Verdict {
        result,
        termination,
        proper,
        no_dead,
        witness,
        stats: Stats {
            nodes: g.node_count(),
            edges: g.edge_count(),
            closure_nodes: g_star.node_count(),
            closure_edges: g_star.edge_count(),
            elapsed: started.elapsed(),
        },
        k,
        resources: w
            .resources()
            .iter()
            .map(|&(p, n)| (net.place_name(p).to_string(), n))
            .collect(),
        initial: m0,
        final_marking: mf,
        places: net.places().to_vec(),
    })
}
