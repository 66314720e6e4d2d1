use indexmap::IndexSet;
use thiserror::Error;

use crate::petri::{Marking, Net, NetError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("exploration cap must be at least 1")]
    ZeroCap,
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub transition: usize,
    pub to: usize,
}

/// Evidence that the net is unbounded: firing `transition` at node `from`
/// produces `descendant`, which strictly covers the marking of node
/// `ancestor` on the search-tree path to `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedWitness {
    pub ancestor: usize,
    pub from: usize,
    pub transition: usize,
    pub descendant: Marking,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Complete,
    Unbounded(UnboundedWitness),
    CapExceeded(usize),
}

/// The markings reachable from a root, with transition-labelled edges.
///
/// Node 0 is the root. Nodes are numbered in breadth-first discovery order,
/// so node indices are non-decreasing in distance from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityGraph {
    nodes: IndexSet<Marking>,
    edges: Vec<Edge>,
    // search-tree parent of each node: (parent node, transition)
    parent: Vec<Option<(usize, usize)>>,
    labels: Vec<String>,
    status: Status,
}

/// Breadth-first exploration of `[m0⟩` with deduplication and
/// unboundedness detection.
///
/// Before a new marking is inserted it is compared against every marking on
/// its search-tree path; strict coverage stops exploration with
/// [`Status::Unbounded`]. Inserting more than `cap` nodes stops exploration
/// with [`Status::CapExceeded`].
pub fn explore(net: &Net, m0: &Marking, cap: usize) -> Result<ReachabilityGraph, ExploreError> {
    if cap == 0 {
        return Err(ExploreError::ZeroCap);
    }
    // validates the marking dimension once
    net.enabled_transitions(m0)?;

    let mut g = ReachabilityGraph {
        nodes: IndexSet::from([m0.clone()]),
        edges: Vec::new(),
        parent: vec![None],
        labels: net.transitions().to_vec(),
        status: Status::Complete,
    };
    let mut head = 0;
    while head < g.nodes.len() {
        let current = g.nodes[head].clone();
        for t in 0..net.transition_count() {
            if !net.enabled_unchecked(&current, t) {
                continue;
            }
            let next = net.fire_unchecked(&current, t)?;
            if let Some(to) = g.nodes.get_index_of(&next) {
                g.edges.push(Edge {
                    from: head,
                    transition: t,
                    to,
                });
                continue;
            }
            if let Some(ancestor) = g.covered_ancestor(head, &next) {
                g.status = Status::Unbounded(UnboundedWitness {
                    ancestor,
                    from: head,
                    transition: t,
                    descendant: next,
                });
                return Ok(g);
            }
            if g.nodes.len() >= cap {
                g.status = Status::CapExceeded(cap);
                return Ok(g);
            }
            let (to, _) = g.nodes.insert_full(next);
            g.parent.push(Some((head, t)));
            g.edges.push(Edge {
                from: head,
                transition: t,
                to,
            });
        }
        head += 1;
    }
    Ok(g)
}

impl ReachabilityGraph {
    fn covered_ancestor(&self, from: usize, next: &Marking) -> Option<usize> {
        let mut cursor = Some(from);
        while let Some(n) = cursor {
            if self.nodes[n].strictly_below(next) {
                return Some(n);
            }
            cursor = self.parent[n].map(|(p, _)| p);
        }
        None
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self) -> &Marking {
        &self.nodes[0]
    }

    pub fn marking(&self, node: usize) -> &Marking {
        &self.nodes[node]
    }

    pub fn markings(&self) -> impl ExactSizeIterator<Item = &Marking> {
        self.nodes.iter()
    }

    pub fn index_of(&self, m: &Marking) -> Option<usize> {
        self.nodes.get_index_of(m)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn transition_label(&self, t: usize) -> &str {
        &self.labels[t]
    }

    /// Transitions seen firing anywhere in the explored part, including
    /// the step that exposed an unboundedness witness.
    pub fn fired_transitions(&self) -> Vec<bool> {
        let mut fired = vec![false; self.labels.len()];
        for e in &self.edges {
            fired[e.transition] = true;
        }
        if let Status::Unbounded(w) = &self.status {
            fired[w.transition] = true;
        }
        fired
    }

    /// Minimal-length firing sequence from the root to `target`. Ties are
    /// broken towards smaller transition indices by the search order.
    pub fn shortest_trace(&self, target: usize) -> Trace {
        let mut steps = Vec::new();
        let mut cursor = target;
        while let Some((p, t)) = self.parent[cursor] {
            steps.push(t);
            cursor = p;
        }
        steps.reverse();
        Trace {
            names: steps.iter().map(|&t| self.labels[t].clone()).collect(),
            transitions: steps,
            start: self.nodes[0].clone(),
            end: self.nodes[target].clone(),
        }
    }

    /// Trace from the root to the strictly larger marking of an
    /// unboundedness witness.
    pub fn witness_trace(&self, w: &UnboundedWitness) -> Trace {
        let mut trace = self.shortest_trace(w.from);
        trace.transitions.push(w.transition);
        trace.names.push(self.labels[w.transition].clone());
        trace.end = w.descendant.clone();
        trace
    }
}

/// A firing sequence with its start and end markings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub transitions: Vec<usize>,
    pub names: Vec<String>,
    pub start: Marking,
    pub end: Marking,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Replays the sequence from `start` with the firing rule.
    pub fn replay(&self, net: &Net) -> Result<Marking, NetError> {
        self.transitions
            .iter()
            .try_fold(self.start.clone(), |m, &t| net.fire(&m, t))
    }

    /// True when replaying from `start` ends exactly at `end`.
    pub fn is_valid_for(&self, net: &Net) -> bool {
        self.replay(net).is_ok_and(|m| m == self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(places: &[&str], transitions: &[&str], arcs: &[(&str, &str, u32)]) -> Net {
        Net::from_parts(places, transitions, arcs).unwrap()
    }

    fn seq2() -> Net {
        net(
            &["i", "p1", "f"],
            &["t1", "t2"],
            &[("i", "t1", 1), ("t1", "p1", 1), ("p1", "t2", 1), ("t2", "f", 1)],
        )
    }

    fn andxor() -> Net {
        net(
            &["i", "p1", "p2", "f"],
            &["t0", "t1", "t2"],
            &[
                ("i", "t0", 1),
                ("t0", "p1", 1),
                ("t0", "p2", 1),
                ("p1", "t1", 1),
                ("t1", "f", 1),
                ("p2", "t2", 1),
                ("t2", "f", 1),
            ],
        )
    }

    fn ms(g: &ReachabilityGraph) -> Vec<Vec<u32>> {
        g.markings().map(|m| m.as_slice().to_vec()).collect()
    }

    #[test]
    fn seq2_graph() {
        let g = explore(&seq2(), &vec![1, 0, 0].into(), 100).unwrap();
        assert!(g.is_complete());
        assert_eq!(ms(&g), [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn andxor_graph() {
        let g = explore(&andxor(), &vec![1, 0, 0, 0].into(), 100).unwrap();
        assert!(g.is_complete());
        let mut got = ms(&g);
        got.sort();
        let mut want = vec![
            vec![1, 0, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 1],
            vec![0, 1, 0, 1],
            vec![0, 0, 0, 2],
        ];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(g.edge_count(), 5);
    }

    #[test]
    fn unbounded_net_is_detected() {
        let unb = net(
            &["i", "p1", "f"],
            &["t1", "t2", "t3"],
            &[
                ("i", "t1", 1),
                ("t1", "p1", 1),
                ("p1", "t2", 1),
                ("t2", "p1", 2),
                ("p1", "t3", 1),
                ("t3", "f", 1),
            ],
        );
        let g = explore(&unb, &vec![1, 0, 0].into(), 100).unwrap();
        let Status::Unbounded(w) = g.status() else {
            panic!("expected unbounded, got {:?}", g.status())
        };
        assert_eq!(g.marking(w.ancestor), &vec![0, 1, 0].into());
        assert_eq!(w.descendant, vec![0, 2, 0].into());
        let trace = g.witness_trace(w);
        assert_eq!(trace.names, ["t1", "t2"]);
        assert!(trace.is_valid_for(&unb));
    }

    #[test]
    fn cap_is_enforced() {
        let g = explore(&seq2(), &vec![1, 0, 0].into(), 2).unwrap();
        assert_eq!(g.status(), &Status::CapExceeded(2));
        assert_eq!(g.node_count(), 2);
        assert_eq!(
            explore(&seq2(), &vec![1, 0, 0].into(), 0),
            Err(ExploreError::ZeroCap)
        );
        let g = explore(&seq2(), &vec![1, 0, 0].into(), 3).unwrap();
        assert!(g.is_complete());
    }

    #[test]
    fn marking_dimension_is_checked() {
        assert!(matches!(
            explore(&seq2(), &vec![1, 0].into(), 10),
            Err(ExploreError::Net(NetError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn shortest_traces() {
        let g = explore(&seq2(), &vec![1, 0, 0].into(), 100).unwrap();
        let t = g.shortest_trace(g.index_of(&vec![0, 0, 1].into()).unwrap());
        assert_eq!(t.names, ["t1", "t2"]);
        assert!(g.shortest_trace(0).is_empty());

        let net = andxor();
        let g = explore(&net, &vec![1, 0, 0, 0].into(), 100).unwrap();
        let t = g.shortest_trace(g.index_of(&vec![0, 0, 0, 2].into()).unwrap());
        assert_eq!(t.names, ["t0", "t1", "t2"]);
        assert!(t.is_valid_for(&net));
    }

    #[test]
    fn edges_follow_the_firing_rule_and_graph_is_closed() {
        let net = andxor();
        let g = explore(&net, &vec![2, 0, 0, 0].into(), 1000).unwrap();
        for e in g.edges() {
            assert_eq!(
                &net.fire(g.marking(e.from), e.transition).unwrap(),
                g.marking(e.to)
            );
        }
        for (i, m) in g.markings().enumerate() {
            for t in net.enabled_transitions(m).unwrap() {
                assert!(g.edges().iter().any(|e| e.from == i && e.transition == t));
            }
        }
    }

    #[test]
    fn exploration_is_deterministic() {
        let net = andxor();
        let a = explore(&net, &vec![3, 0, 0, 0].into(), 1000).unwrap();
        let b = explore(&net, &vec![3, 0, 0, 0].into(), 1000).unwrap();
        assert_eq!(a, b);
    }
}
