//! Workflow nets: structural validation, the closure net `N*`, resource
//! places and the initial/final markings for `k` instances.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::petri::{Marking, Net, NetError, Node, Tokens};

/// Identifier given to the closure transition, suffixed with a counter on
/// collision.
pub const CLOSURE_TRANSITION: &str = "t*";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("the number of instances k must be at least 1")]
    ZeroInstances,
    #[error("invalid workflow net: {0}")]
    Invalid(StructuralReport),
    #[error("resource place `{0}` cannot be the source or sink place")]
    ResourceIsTerminal(String),
    #[error("resource place `{0}` has no connected arcs")]
    ResourceUnconnected(String),
    #[error("resource place `{0}` is declared twice")]
    DuplicateResource(String),
}

/// Which of the three workflow-net conditions a violation concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "u8")]
pub enum Condition {
    SourcePlace = 1,
    SinkPlace = 2,
    Connectivity = 3,
}

impl From<Condition> for u8 {
    fn from(c: Condition) -> u8 {
        c as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationDetail {
    NoSourcePlace,
    MultipleSourcePlaces { places: Vec<String> },
    SourceHasPreset { place: String, preset: Vec<String> },
    NoSinkPlace,
    MultipleSinkPlaces { places: Vec<String> },
    SinkHasPostset { place: String, postset: Vec<String> },
    SourceIsSink { place: String },
    NotReachableFromSource { node: String },
    CannotReachSink { node: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub detail: ViolationDetail,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {}: ", self.condition as u8)?;
        match &self.detail {
            ViolationDetail::NoSourcePlace => write!(f, "no place with an empty preset"),
            ViolationDetail::MultipleSourcePlaces { places } => {
                write!(f, "several places with an empty preset: {}", places.join(", "))
            }
            ViolationDetail::SourceHasPreset { place, preset } => write!(
                f,
                "declared source `{place}` has a non-empty preset: {}",
                preset.join(", ")
            ),
            ViolationDetail::NoSinkPlace => write!(f, "no place with an empty postset"),
            ViolationDetail::MultipleSinkPlaces { places } => {
                write!(f, "several places with an empty postset: {}", places.join(", "))
            }
            ViolationDetail::SinkHasPostset { place, postset } => write!(
                f,
                "declared sink `{place}` has a non-empty postset: {}",
                postset.join(", ")
            ),
            ViolationDetail::SourceIsSink { place } => {
                write!(f, "`{place}` would be both source and sink")
            }
            ViolationDetail::NotReachableFromSource { node } => {
                write!(f, "`{node}` is not reachable from the source place")
            }
            ViolationDetail::CannotReachSink { node } => {
                write!(f, "`{node}` has no path to the sink place")
            }
        }
    }
}

/// Outcome of structural validation. Valid iff there are no violations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub source: Option<String>,
    pub sink: Option<String>,
    pub violations: Vec<Violation>,
}

impl StructuralReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations_of(&self, condition: Condition) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.condition == condition)
    }
}

impl fmt::Display for StructuralReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(
                f,
                "valid (source `{}`, sink `{}`)",
                self.source.as_deref().unwrap_or("?"),
                self.sink.as_deref().unwrap_or("?")
            );
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

/// A net with a validated source place `i` and sink place `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfNet {
    net: Net,
    source: usize,
    sink: usize,
}

/// Validation result: the report, plus the workflow net when valid.
#[derive(Debug, Clone)]
pub struct Validation<W> {
    pub report: StructuralReport,
    pub wfnet: Option<W>,
}

impl<W> Validation<W> {
    pub fn into_result(self) -> Result<W, WfError> {
        match self.wfnet {
            Some(w) => Ok(w),
            None => Err(WfError::Invalid(self.report)),
        }
    }
}

/// Checks the three workflow-net conditions and builds a [`WfNet`] when
/// they hold.
pub fn validate_wfnet(
    net: Net,
    declared_source: Option<&str>,
    declared_sink: Option<&str>,
) -> Result<Validation<WfNet>, NetError> {
    let excluded = vec![false; net.place_count()];
    validate_with_exclusions(net, declared_source, declared_sink, &excluded)
}

fn declared_place(net: &Net, id: Option<&str>) -> Result<Option<usize>, NetError> {
    id.map(|id| net.place(id)).transpose()
}

fn validate_with_exclusions(
    net: Net,
    declared_source: Option<&str>,
    declared_sink: Option<&str>,
    excluded: &[bool],
) -> Result<Validation<WfNet>, NetError> {
    let declared_source = declared_place(&net, declared_source)?;
    let declared_sink = declared_place(&net, declared_sink)?;
    let mut violations = Vec::new();

    let live_places: Vec<usize> = (0..net.place_count()).filter(|&p| !excluded[p]).collect();
    let names = |ps: &[usize]| ps.iter().map(|&p| net.place_name(p).to_string()).collect();
    let source_candidates: Vec<usize> = live_places
        .iter()
        .copied()
        .filter(|&p| net.place_preset(p).is_empty())
        .collect();
    let sink_candidates: Vec<usize> = live_places
        .iter()
        .copied()
        .filter(|&p| net.place_postset(p).is_empty())
        .collect();

    // condition 1
    if source_candidates.is_empty() {
        violations.push(Violation {
            condition: Condition::SourcePlace,
            detail: ViolationDetail::NoSourcePlace,
        });
    } else if source_candidates.len() > 1 {
        violations.push(Violation {
            condition: Condition::SourcePlace,
            detail: ViolationDetail::MultipleSourcePlaces {
                places: names(&source_candidates),
            },
        });
    }
    if let Some(s) = declared_source {
        if !net.place_preset(s).is_empty() {
            violations.push(Violation {
                condition: Condition::SourcePlace,
                detail: ViolationDetail::SourceHasPreset {
                    place: net.place_name(s).to_string(),
                    preset: net
                        .place_preset(s)
                        .iter()
                        .map(|&t| net.transition_name(t).to_string())
                        .collect(),
                },
            });
        }
    }

    // condition 2
    if sink_candidates.is_empty() {
        violations.push(Violation {
            condition: Condition::SinkPlace,
            detail: ViolationDetail::NoSinkPlace,
        });
    } else if sink_candidates.len() > 1 {
        violations.push(Violation {
            condition: Condition::SinkPlace,
            detail: ViolationDetail::MultipleSinkPlaces {
                places: names(&sink_candidates),
            },
        });
    }
    if let Some(s) = declared_sink {
        if !net.place_postset(s).is_empty() {
            violations.push(Violation {
                condition: Condition::SinkPlace,
                detail: ViolationDetail::SinkHasPostset {
                    place: net.place_name(s).to_string(),
                    postset: net
                        .place_postset(s)
                        .iter()
                        .map(|&t| net.transition_name(t).to_string())
                        .collect(),
                },
            });
        }
    }

    // With several candidates, anchor the path check on the one covering
    // the most nodes so the remaining ones show up as concrete witnesses.
    let source = declared_source.or_else(|| {
        pick_anchor(&source_candidates, |p| {
            reach(&net, Node::Place(p), excluded, Direction::Forward)
        })
    });
    let sink = declared_sink.or_else(|| {
        pick_anchor(&sink_candidates, |p| {
            reach(&net, Node::Place(p), excluded, Direction::Backward)
        })
    });

    if let (Some(i), Some(f)) = (source, sink) {
        if i == f {
            violations.push(Violation {
                condition: Condition::SinkPlace,
                detail: ViolationDetail::SourceIsSink {
                    place: net.place_name(i).to_string(),
                },
            });
        }
        // condition 3
        let from_source = reach(&net, Node::Place(i), excluded, Direction::Forward);
        let to_sink = reach(&net, Node::Place(f), excluded, Direction::Backward);
        let nodes = live_places
            .iter()
            .map(|&p| Node::Place(p))
            .chain((0..net.transition_count()).map(Node::Transition));
        for node in nodes {
            let k = flat_index(&net, node);
            if !from_source[k] {
                violations.push(Violation {
                    condition: Condition::Connectivity,
                    detail: ViolationDetail::NotReachableFromSource {
                        node: net.node_name(node).to_string(),
                    },
                });
            }
            if !to_sink[k] {
                violations.push(Violation {
                    condition: Condition::Connectivity,
                    detail: ViolationDetail::CannotReachSink {
                        node: net.node_name(node).to_string(),
                    },
                });
            }
        }
    }

    let report = StructuralReport {
        source: source.map(|p| net.place_name(p).to_string()),
        sink: sink.map(|p| net.place_name(p).to_string()),
        violations,
    };
    let wfnet = match (report.is_valid(), source, sink) {
        (true, Some(source), Some(sink)) => Some(WfNet { net, source, sink }),
        _ => None,
    };
    Ok(Validation { report, wfnet })
}

fn pick_anchor(candidates: &[usize], coverage: impl Fn(usize) -> Vec<bool>) -> Option<usize> {
    match candidates {
        [] => None,
        [only] => Some(*only),
        _ => {
            let mut best = (0, candidates[0]);
            for &c in candidates {
                let n = coverage(c).iter().filter(|&&b| b).count();
                if n > best.0 {
                    best = (n, c);
                }
            }
            Some(best.1)
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Backward,
}

// places occupy 0..|P|, transitions |P|..|P|+|T|
fn flat_index(net: &Net, node: Node) -> usize {
    match node {
        Node::Place(p) => p,
        Node::Transition(t) => net.place_count() + t,
    }
}

fn reach(net: &Net, start: Node, excluded: &[bool], dir: Direction) -> Vec<bool> {
    let mut seen = vec![false; net.place_count() + net.transition_count()];
    let mut queue = VecDeque::from([start]);
    seen[flat_index(net, start)] = true;
    while let Some(node) = queue.pop_front() {
        let next: Vec<Node> = match (node, dir) {
            (Node::Place(p), Direction::Forward) => net
                .place_postset(p)
                .iter()
                .map(|&t| Node::Transition(t))
                .collect(),
            (Node::Place(p), Direction::Backward) => {
                net.place_preset(p).iter().map(|&t| Node::Transition(t)).collect()
            }
            (Node::Transition(t), Direction::Forward) => {
                net.outputs(t).iter().map(|&(p, _)| Node::Place(p)).collect()
            }
            (Node::Transition(t), Direction::Backward) => {
                net.inputs(t).iter().map(|&(p, _)| Node::Place(p)).collect()
            }
        };
        for n in next {
            if let Node::Place(p) = n {
                if excluded[p] {
                    continue;
                }
            }
            let k = flat_index(net, n);
            if !seen[k] {
                seen[k] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

impl WfNet {
    /// Validates `net`, auto-detecting source and sink.
    pub fn from_net(net: Net) -> Result<WfNet, WfError> {
        validate_wfnet(net, None, None)?.into_result()
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// `k` tokens in the source place, none elsewhere.
    pub fn initial_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        unit_marking(self.net.place_count(), self.source, k)
    }

    /// `k` tokens in the sink place, none elsewhere.
    pub fn final_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        unit_marking(self.net.place_count(), self.sink, k)
    }
}

fn unit_marking(places: usize, at: usize, k: Tokens) -> Result<Marking, WfError> {
    if k == 0 {
        return Err(WfError::ZeroInstances);
    }
    let mut m = Marking::zeros(places);
    m.set(at, k);
    Ok(m)
}

/// The closure net `N*`: the workflow net plus a transition `t*` moving a
/// token from the sink back to the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub net: Net,
    /// Index of `t*`; always the last transition.
    pub star: usize,
}

pub fn closure(wf: &WfNet) -> Closure {
    let net = wf.net();
    let mut name = CLOSURE_TRANSITION.to_string();
    let mut n = 0;
    while net.contains_id(&name) {
        n += 1;
        name = format!("{CLOSURE_TRANSITION}{n}");
    }
    let mut b = net.to_builder();
    let star = b
        .add_transition(&name)
        .expect("closure name is fresh by construction");
    b.add_arc_between(Node::Place(wf.sink()), Node::Transition(star), 1)
        .and_then(|_| b.add_arc_between(Node::Transition(star), Node::Place(wf.source()), 1))
        .expect("t* is fresh so its arcs cannot collide");
    Closure { net: b.build(), star }
}

/// A workflow net with shared resource places initially marked `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfrNet {
    wfnet: WfNet,
    // (place, R(place)), sorted by place index
    resources: Vec<(usize, Tokens)>,
}

/// Validates the workflow part of a net with declared resource places.
///
/// Resource places are removed before the three structural conditions are
/// checked; the returned net keeps them.
pub fn validate_wfrnet(
    net: Net,
    declared_source: Option<&str>,
    declared_sink: Option<&str>,
    resources: &[(&str, Tokens)],
) -> Result<Validation<WfrNet>, WfError> {
    let mut excluded = vec![false; net.place_count()];
    let mut marked = Vec::with_capacity(resources.len());
    for &(id, count) in resources {
        let p = net.place(id)?;
        if excluded[p] {
            return Err(WfError::DuplicateResource(id.to_string()));
        }
        if net.place_preset(p).is_empty() && net.place_postset(p).is_empty() {
            return Err(WfError::ResourceUnconnected(id.to_string()));
        }
        excluded[p] = true;
        marked.push((p, count));
    }
    for declared in [declared_source, declared_sink].into_iter().flatten() {
        if let Ok(p) = net.place(declared) {
            if excluded[p] {
                return Err(WfError::ResourceIsTerminal(declared.to_string()));
            }
        }
    }
    marked.sort_unstable();
    let Validation { report, wfnet } =
        validate_with_exclusions(net, declared_source, declared_sink, &excluded)?;
    Ok(Validation {
        report,
        wfnet: wfnet.map(|wfnet| WfrNet {
            wfnet,
            resources: marked,
        }),
    })
}

impl WfrNet {
    pub fn wfnet(&self) -> &WfNet {
        &self.wfnet
    }

    pub fn resources(&self) -> &[(usize, Tokens)] {
        &self.resources
    }

    /// The marking `R` over all places (zero outside resource places).
    pub fn resource_marking(&self) -> Marking {
        let mut m = Marking::zeros(self.wfnet.net.place_count());
        for &(p, n) in &self.resources {
            m.set(p, n);
        }
        m
    }

    /// `k·i + R`.
    pub fn initial_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        let mut m = self.resource_marking();
        m.set(self.wfnet.source, unit_check(k)?);
        Ok(m)
    }

    /// `k·f + R`.
    pub fn final_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        let mut m = self.resource_marking();
        m.set(self.wfnet.sink, unit_check(k)?);
        Ok(m)
    }
}

fn unit_check(k: Tokens) -> Result<Tokens, WfError> {
    if k == 0 {
        Err(WfError::ZeroInstances)
    } else {
        Ok(k)
    }
}

/// Common view over plain and resource-augmented workflow nets.
pub trait Workflow {
    fn wfnet(&self) -> &WfNet;

    /// Resource places with their initial counts; empty for plain nets.
    fn resources(&self) -> &[(usize, Tokens)];

    fn initial_marking(&self, k: Tokens) -> Result<Marking, WfError>;

    fn final_marking(&self, k: Tokens) -> Result<Marking, WfError>;

    fn net(&self) -> &Net {
        self.wfnet().net()
    }
}

impl Workflow for WfNet {
    fn wfnet(&self) -> &WfNet {
        self
    }

    fn resources(&self) -> &[(usize, Tokens)] {
        &[]
    }

    fn initial_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        WfNet::initial_marking(self, k)
    }

    fn final_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        WfNet::final_marking(self, k)
    }
}

impl Workflow for WfrNet {
    fn wfnet(&self) -> &WfNet {
        &self.wfnet
    }

    fn resources(&self) -> &[(usize, Tokens)] {
        &self.resources
    }

    fn initial_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        WfrNet::initial_marking(self, k)
    }

    fn final_marking(&self, k: Tokens) -> Result<Marking, WfError> {
        WfrNet::final_marking(self, k)
    }
}
