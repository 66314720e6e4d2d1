//! Shared helpers for the integration tests: fixtures, a generator of
//! block-structured workflow nets, single-arc mutations, and a brute-force
//! oracle for the soundness conditions written independently of the
//! library's firing rule and graph code.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wfnet_core::io::{load_document, LoadedWorkflow};
use wfnet_core::petri::{Marking, Net, Tokens};
use wfnet_core::promela::interp::Program;
use wfnet_core::promela::{emit_model, EmitOptions, Property, Variant};
use wfnet_core::statespace::{explore, SoundnessResult, Trace, Verdict};
use wfnet_core::wfnet::{closure, validate_wfnet, WfNet, Workflow};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub fn load(name: &str) -> LoadedWorkflow {
    let doc = load_document(&fixture(name)).unwrap();
    let (report, w) = doc.validate().unwrap();
    w.unwrap_or_else(|| panic!("{name} is not a workflow net: {report}"))
}

/// The frozen emission cases: golden file, fixture and options.
pub fn golden_cases() -> Vec<(&'static str, &'static str, EmitOptions)> {
    let plain = vec![Property::Termination, Property::Proper];
    let closure = vec![Property::Termination, Property::Proper, Property::NoDead];
    let opts = |k, variant, weighted, properties: &Vec<Property>| EmitOptions {
        k,
        variant,
        weighted,
        properties: properties.clone(),
    };
    vec![
        ("seq2_k1.pml", "seq2.wfn", opts(1, Variant::Plain, false, &plain)),
        (
            "seq2_k1_closure.pml",
            "seq2.wfn",
            opts(1, Variant::Closure, false, &closure),
        ),
        ("seq2_k3.pml", "seq2.wfn", opts(3, Variant::Plain, false, &plain)),
        (
            "seq2_k3_closure.pml",
            "seq2.wfn",
            opts(3, Variant::Closure, false, &closure),
        ),
        (
            "k2net_weighted.pml",
            "k2net.wfn",
            opts(2, Variant::Plain, true, &plain),
        ),
    ]
}

/// A net as plain identifier lists, convenient to mutate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDesc {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub arcs: Vec<(String, String, Tokens)>,
}

impl NetDesc {
    pub fn build(&self) -> Net {
        let p: Vec<&str> = self.places.iter().map(String::as_str).collect();
        let t: Vec<&str> = self.transitions.iter().map(String::as_str).collect();
        let a: Vec<(&str, &str, Tokens)> = self
            .arcs
            .iter()
            .map(|(x, y, w)| (x.as_str(), y.as_str(), *w))
            .collect();
        Net::from_parts(&p, &t, &a).unwrap()
    }

    pub fn wfnet(&self) -> Option<WfNet> {
        validate_wfnet(self.build(), Some("i"), Some("f"))
            .unwrap()
            .into_result()
            .ok()
    }

    pub fn from_net(net: &Net) -> NetDesc {
        NetDesc {
            places: net.places().to_vec(),
            transitions: net.transitions().to_vec(),
            arcs: net
                .arcs()
                .iter()
                .map(|a| {
                    (
                        net.node_name(a.source).to_string(),
                        net.node_name(a.target).to_string(),
                        a.weight,
                    )
                })
                .collect(),
        }
    }

    fn has_arc(&self, from: &str, to: &str) -> bool {
        self.arcs.iter().any(|(x, y, _)| x == from && y == to)
    }
}

#[derive(Debug, Clone)]
enum Block {
    Task,
    Seq(Box<Block>, Box<Block>),
    And(Box<Block>, Box<Block>),
    Xor(Box<Block>, Box<Block>),
    Loop(Box<Block>, Box<Block>),
}

fn random_block(rng: &mut ChaCha8Rng, tasks: usize) -> Block {
    if tasks <= 1 {
        return Block::Task;
    }
    let left = rng.random_range(1..tasks);
    let (a, b) = (
        Box::new(random_block(rng, left)),
        Box::new(random_block(rng, tasks - left)),
    );
    match rng.random_range(0..4) {
        0 => Block::Seq(a, b),
        1 => Block::And(a, b),
        2 => Block::Xor(a, b),
        _ => Block::Loop(a, b),
    }
}

struct Builder {
    desc: NetDesc,
}

impl Builder {
    fn place(&mut self) -> String {
        let name = format!("p{}", self.desc.places.len() - 2);
        self.desc.places.push(name.clone());
        name
    }

    fn transition(&mut self, inputs: &[&str], outputs: &[&str]) {
        let name = format!("t{}", self.desc.transitions.len());
        for p in inputs {
            self.desc.arcs.push((p.to_string(), name.clone(), 1));
        }
        for p in outputs {
            self.desc.arcs.push((name.clone(), p.to_string(), 1));
        }
        self.desc.transitions.push(name);
    }

    fn block(&mut self, b: &Block, entry: &str, exit: &str) {
        match b {
            Block::Task => self.transition(&[entry], &[exit]),
            Block::Seq(x, y) => {
                let mid = self.place();
                self.block(x, entry, &mid);
                self.block(y, &mid, exit);
            }
            Block::Xor(x, y) => {
                self.block(x, entry, exit);
                self.block(y, entry, exit);
            }
            Block::And(x, y) => {
                let (xi, yi) = (self.place(), self.place());
                let (xo, yo) = (self.place(), self.place());
                self.transition(&[entry], &[&xi, &yi]);
                self.block(x, &xi, &xo);
                self.block(y, &yi, &yo);
                self.transition(&[&xo, &yo], &[exit]);
            }
            Block::Loop(body, redo) => {
                let (head, tail) = (self.place(), self.place());
                self.transition(&[entry], &[&head]);
                self.block(body, &head, &tail);
                self.block(redo, &tail, &head);
                self.transition(&[&tail], &[exit]);
            }
        }
    }
}

/// A random block-structured net with at most `max_tasks` task transitions.
/// Such nets are sound by construction.
pub fn block_structured(rng: &mut ChaCha8Rng, max_tasks: usize) -> NetDesc {
    let tasks = rng.random_range(1..=max_tasks);
    block_structured_with(rng, tasks)
}

/// A random block-structured net with exactly `tasks` task transitions.
pub fn block_structured_with(rng: &mut ChaCha8Rng, tasks: usize) -> NetDesc {
    let tree = random_block(rng, tasks);
    let mut b = Builder {
        desc: NetDesc {
            places: vec!["i".into(), "f".into()],
            transitions: Vec::new(),
            arcs: Vec::new(),
        },
    };
    b.block(&tree, "i", "f");
    b.desc
}

/// Every single-arc change that keeps the structural conditions: a weight
/// raised to 2, an added place-to-transition arc from a place other than
/// `f`, an added transition-to-place arc into a place other than `i`, or a
/// removed arc.
pub fn mutations(desc: &NetDesc) -> Vec<NetDesc> {
    let mut out = Vec::new();
    for k in 0..desc.arcs.len() {
        let mut m = desc.clone();
        m.arcs[k].2 = 2;
        out.push(m);
        let mut m = desc.clone();
        m.arcs.remove(k);
        out.push(m);
    }
    for p in &desc.places {
        for t in &desc.transitions {
            if p != "f" && !desc.has_arc(p, t) {
                let mut m = desc.clone();
                m.arcs.push((p.clone(), t.clone(), 1));
                out.push(m);
            }
            if p != "i" && !desc.has_arc(t, p) {
                let mut m = desc.clone();
                m.arcs.push((t.clone(), p.clone(), 1));
                out.push(m);
            }
        }
    }
    out.retain(|m| m.wfnet().is_some());
    out
}

/// The oracle corpus: 200 block-structured nets and one random
/// structurally valid mutant of each.
pub fn corpus(seed: u64) -> (Vec<NetDesc>, Vec<NetDesc>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bases = Vec::new();
    let mut mutants = Vec::new();
    while bases.len() < 200 {
        let base = block_structured(&mut rng, 12);
        let ms = mutations(&base);
        if ms.is_empty() {
            continue;
        }
        let pick = rng.random_range(0..ms.len());
        mutants.push(ms[pick].clone());
        bases.push(base);
    }
    (bases, mutants)
}

/// Outcome of the brute-force oracle. `None` marks a condition that could
/// not be decided within the state limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOutcome {
    pub termination: Option<bool>,
    pub proper: Option<bool>,
    pub no_dead: Option<bool>,
}

pub const ORACLE_LIMIT: usize = 10_000;

/// Transition table built straight from an arc list.
struct Table {
    places: usize,
    /// Per transition: consumed and produced tokens per place.
    pre: Vec<Vec<u64>>,
    post: Vec<Vec<u64>>,
}

impl Table {
    fn new(places: &[String], transitions: &[String], arcs: &[(String, String, Tokens)]) -> Table {
        let pidx: HashMap<&str, usize> = places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let tidx: HashMap<&str, usize> = transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let mut pre = vec![vec![0; places.len()]; transitions.len()];
        let mut post = vec![vec![0; places.len()]; transitions.len()];
        for (x, y, w) in arcs {
            if let (Some(&p), Some(&t)) = (pidx.get(x.as_str()), tidx.get(y.as_str())) {
                pre[t][p] += u64::from(*w);
            } else {
                post[tidx[x.as_str()]][pidx[y.as_str()]] += u64::from(*w);
            }
        }
        Table {
            places: places.len(),
            pre,
            post,
        }
    }

    fn step(&self, m: &[u64], t: usize) -> Option<Vec<u64>> {
        if (0..self.places).any(|p| m[p] < self.pre[t][p]) {
            return None;
        }
        Some(
            (0..self.places)
                .map(|p| m[p] - self.pre[t][p] + self.post[t][p])
                .collect(),
        )
    }
}

struct Space {
    states: Vec<Vec<u64>>,
    succ: Vec<Vec<usize>>,
    fired: HashSet<usize>,
    complete: bool,
}

/// Depth-first enumeration with an explicit stack, stopping once
/// `ORACLE_LIMIT` distinct markings are known.
fn enumerate(table: &Table, m0: Vec<u64>) -> Space {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::from([(m0.clone(), 0)]);
    let mut space = Space {
        states: vec![m0],
        succ: vec![Vec::new()],
        fired: HashSet::new(),
        complete: true,
    };
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for t in 0..table.pre.len() {
            let Some(next) = table.step(&space.states[i], t) else {
                continue;
            };
            space.fired.insert(t);
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if space.states.len() >= ORACLE_LIMIT {
                        space.complete = false;
                        return space;
                    }
                    let j = space.states.len();
                    index.insert(next.clone(), j);
                    space.states.push(next);
                    space.succ.push(Vec::new());
                    stack.push(j);
                    j
                }
            };
            space.succ[i].push(j);
        }
    }
    space
}

fn covers(big: &[u64], small: &[u64]) -> bool {
    big.iter().zip(small).all(|(b, s)| b >= s)
}

/// Backward coverability: saturates the minimal basis of the markings from
/// which `target` can be covered, then tests `m0` against it. `None` when
/// the basis grows past the oracle limit.
fn backward_coverable(table: &Table, m0: &[u64], target: &[u64]) -> Option<bool> {
    let mut basis: Vec<Vec<u64>> = vec![target.to_vec()];
    let mut frontier = basis.clone();
    let mut inserted = 0;
    while let Some(m) = frontier.pop() {
        if covers(m0, &m) {
            return Some(true);
        }
        for u in 0..table.pre.len() {
            let pre_image: Vec<u64> = (0..table.places)
                .map(|p| m[p].saturating_sub(table.post[u][p]) + table.pre[u][p])
                .collect();
            if basis.iter().any(|b| covers(&pre_image, b)) {
                continue;
            }
            basis.retain(|b| !covers(b, &pre_image));
            frontier.retain(|b| !covers(b, &pre_image));
            basis.push(pre_image.clone());
            frontier.push(pre_image);
            inserted += 1;
            if inserted > ORACLE_LIMIT {
                return None;
            }
        }
    }
    Some(basis.iter().any(|b| covers(m0, b)))
}

/// Markings from which `target` is reachable, by fixed-point iteration.
fn can_reach(space: &Space, target: &[u64]) -> Vec<bool> {
    let mut good: Vec<bool> = space.states.iter().map(|m| m == target).collect();
    loop {
        let mut changed = false;
        for i in 0..space.states.len() {
            if !good[i] && space.succ[i].iter().any(|&j| good[j]) {
                good[i] = true;
                changed = true;
            }
        }
        if !changed {
            return good;
        }
    }
}

/// Decides the three conditions for `k` instances by exhaustive search.
/// The closure is formed here by adding a fresh transition `f -> i`.
pub fn oracle(desc: &NetDesc, k: Tokens) -> OracleOutcome {
    oracle_with(desc, "i", "f", k, &[])
}

/// The oracle for an explicit source, sink and resource marking.
pub fn oracle_with(
    desc: &NetDesc,
    source_id: &str,
    sink_id: &str,
    k: Tokens,
    resources: &[(String, Tokens)],
) -> OracleOutcome {
    let position = |id: &str| desc.places.iter().position(|p| p == id).unwrap();
    let (source, sink) = (position(source_id), position(sink_id));
    let mut m0 = vec![0u64; desc.places.len()];
    m0[source] = u64::from(k);
    let mut mf = vec![0u64; desc.places.len()];
    mf[sink] = u64::from(k);
    for (r, n) in resources {
        m0[position(r)] = u64::from(*n);
        mf[position(r)] = u64::from(*n);
    }

    let table = Table::new(&desc.places, &desc.transitions, &desc.arcs);
    let space = enumerate(&table, m0.clone());
    let (termination, proper) = if space.complete {
        let good = can_reach(&space, &mf);
        (
            Some(good.iter().all(|&g| g)),
            Some(space.states.iter().all(|m| m[sink] < u64::from(k) || *m == mf)),
        )
    } else {
        (None, None)
    };

    let mut transitions = desc.transitions.clone();
    let star = "__closure".to_string();
    transitions.push(star.clone());
    let mut arcs = desc.arcs.clone();
    arcs.push((sink_id.to_string(), star.clone(), 1));
    arcs.push((star, source_id.to_string(), 1));
    let closed = Table::new(&desc.places, &transitions, &arcs);
    let space_star = enumerate(&closed, m0);
    // On an exhaustive enumeration a transition is dead iff it never fired.
    // Past the limit, the ones not seen firing are settled by backward
    // coverability of their preset from the initial marking.
    let no_dead = if space_star.complete {
        Some(space_star.fired.len() == transitions.len())
    } else {
        let start = &space_star.states[0];
        let mut verdict = Some(true);
        for t in (0..transitions.len()).filter(|t| !space_star.fired.contains(t)) {
            match backward_coverable(&closed, start, &closed.pre[t]) {
                Some(true) => {}
                Some(false) => {
                    verdict = Some(false);
                    break;
                }
                None => verdict = None,
            }
        }
        verdict
    };

    OracleOutcome {
        termination,
        proper,
        no_dead,
    }
}

/// Replays a trace with the oracle's own firing rule and returns the
/// reached marking.
pub fn replay_independently(desc: &NetDesc, trace: &Trace) -> Option<Vec<u64>> {
    let table = Table::new(&desc.places, &desc.transitions, &desc.arcs);
    let mut m: Vec<u64> = trace.start.as_slice().iter().map(|&x| u64::from(x)).collect();
    for name in &trace.names {
        let t = desc.transitions.iter().position(|t| t == name)?;
        m = table.step(&m, t)?;
    }
    Some(m)
}

/// Whether the final marking can be reached from `m` (bounded search).
pub fn final_reachable_from(desc: &NetDesc, m: &Marking, k: Tokens) -> Option<bool> {
    let table = Table::new(&desc.places, &desc.transitions, &desc.arcs);
    let sink = desc.places.iter().position(|p| p == "f").unwrap();
    let mut mf = vec![0u64; desc.places.len()];
    mf[sink] = u64::from(k);
    let start: Vec<u64> = m.as_slice().iter().map(|&x| u64::from(x)).collect();
    let space = enumerate(&table, start);
    if space.states.contains(&mf) {
        Some(true)
    } else if space.complete {
        Some(false)
    } else {
        None
    }
}

/// Checks the checker's verdict against the oracle. Returns a description
/// of the first mismatch.
pub fn agreement(desc: &NetDesc, v: &Verdict, o: &OracleOutcome) -> Result<(), String> {
    let checks = [
        (
            "termination",
            v.termination.as_ref().map(|c| c.pass),
            o.termination,
        ),
        ("proper", v.proper.as_ref().map(|c| c.pass), o.proper),
        ("no_dead", v.no_dead.as_ref().map(|c| c.pass), o.no_dead),
    ];
    for (name, checker, oracle) in checks {
        match (checker, oracle) {
            (c, Some(o)) if c == Some(o) => {}
            (c, Some(o)) => {
                return Err(format!("{name}: checker {c:?}, oracle {o} on {desc:?}"));
            }
            (Some(c), None) => {
                // The oracle hit its state limit on a condition the checker
                // decided; only possible if the checker's graph is larger.
                if v.stats.nodes < ORACLE_LIMIT {
                    return Err(format!("{name}: checker {c}, oracle undecided on {desc:?}"));
                }
            }
            (None, None) => {}
        }
    }
    if matches!(v.result, SoundnessResult::Sound)
        && (o.termination == Some(false) || o.proper == Some(false) || o.no_dead == Some(false))
    {
        return Err(format!("sound verdict refuted by the oracle on {desc:?}"));
    }
    Ok(())
}

/// Runs the emitted model in the interpreter and compares its state space
/// with the reachability graph of the same net, node for node in discovery
/// order and edge for edge. Returns the node and edge counts.
pub fn interpreter_matches<W: Workflow>(
    w: &W,
    k: Tokens,
    variant: Variant,
) -> Result<(usize, usize), String> {
    let weighted = w.net().arcs().iter().any(|a| a.weight > 1);
    let model = emit_model(
        w,
        &EmitOptions {
            k,
            variant,
            weighted,
            properties: Vec::new(),
        },
    )
    .map_err(|e| e.to_string())?;
    let program = Program::parse(&model.text).map_err(|e| e.to_string())?;
    let (states, pl_edges) = program.explore(100_000);

    let star;
    let net = match variant {
        Variant::Plain => w.net(),
        Variant::Closure => {
            star = closure(w.wfnet());
            &star.net
        }
    };
    let g = explore(net, &w.initial_marking(k).unwrap(), 100_000).map_err(|e| e.to_string())?;

    let pl_of: Vec<usize> = net
        .places()
        .iter()
        .map(|p| model.maps.place_index(p).unwrap())
        .collect();
    let to_marking = |s: &Vec<i64>| -> Result<Marking, String> {
        pl_of
            .iter()
            .map(|&i| Tokens::try_from(s[i]).map_err(|_| format!("negative place value in {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Marking::new)
    };
    let interp_nodes = states.iter().map(to_marking).collect::<Result<Vec<_>, _>>()?;
    let graph_nodes: Vec<Marking> = g.markings().cloned().collect();
    // An unbounded net has an infinite interpreter state space; the graph
    // then stops at the witness and only its explored part is compared.
    let complete = g.is_complete();
    let prefix = if complete {
        &interp_nodes[..]
    } else {
        &interp_nodes[..graph_nodes.len().min(interp_nodes.len())]
    };
    if prefix != &graph_nodes[..] {
        return Err(format!(
            "node mismatch: interpreter {} nodes, graph {} nodes, first difference at {:?}",
            prefix.len(),
            graph_nodes.len(),
            prefix.iter().zip(&graph_nodes).position(|(a, b)| a != b)
        ));
    }

    let tr_name = |i: usize| {
        model
            .maps
            .transitions
            .iter()
            .find(|&&(_, idx)| idx == i)
            .map(|(n, _)| n.clone())
            .unwrap()
    };
    let mut interp_edges: Vec<(usize, String, usize)> =
        pl_edges.iter().map(|&(a, t, b)| (a, tr_name(t), b)).collect();
    let mut graph_edges: Vec<(usize, String, usize)> = g
        .edges()
        .iter()
        .map(|e| (e.from, net.transition_name(e.transition).to_string(), e.to))
        .collect();
    interp_edges.sort();
    graph_edges.sort();
    let edges_agree = if complete {
        interp_edges == graph_edges
    } else {
        graph_edges.iter().all(|e| interp_edges.binary_search(e).is_ok())
    };
    if !edges_agree {
        return Err(format!(
            "edge mismatch: interpreter {} edges, graph {} edges",
            interp_edges.len(),
            graph_edges.len()
        ));
    }
    Ok((graph_nodes.len(), graph_edges.len()))
}

/// Whether the net graph has no directed cycle.
pub fn is_acyclic(desc: &NetDesc) -> bool {
    let mut succ: HashMap<&str, Vec<&str>> = HashMap::new();
    for (x, y, _) in &desc.arcs {
        succ.entry(x.as_str()).or_default().push(y.as_str());
    }
    // 0 = unvisited, 1 = on the stack, 2 = finished
    let mut state: HashMap<&str, u8> = HashMap::new();
    let nodes: Vec<&str> = desc
        .places
        .iter()
        .chain(&desc.transitions)
        .map(String::as_str)
        .collect();
    for &root in &nodes {
        if state.contains_key(root) {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state.insert(root, 1);
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            let children = succ.get(node).map_or(&[][..], |v| &v[..]);
            if let Some(&c) = children.get(top.1) {
                top.1 += 1;
                match state.get(c) {
                    Some(1) => return false,
                    Some(_) => {}
                    None => {
                        state.insert(c, 1);
                        stack.push((c, 0));
                    }
                }
            } else {
                state.insert(node, 2);
                stack.pop();
            }
        }
    }
    true
}
