//! Karp–Miller coverability graph.
//!
//! A transition is dead exactly when its preset marking is not coverable,
//! which the coverability graph decides even for unbounded nets. Places
//! that can grow without limit carry the value [`OMEGA`].

use std::collections::VecDeque;

use indexmap::IndexSet;

use crate::petri::{Marking, Net};

/// Token count standing for "arbitrarily many".
pub const OMEGA: u64 = u64::MAX;

/// Transitions enabled somewhere in the coverability graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverability {
    /// `fired[t]` holds when `t` is enabled at some node.
    pub fired: Vec<bool>,
    pub nodes: usize,
    /// False when the graph hit the node cap before closing.
    pub complete: bool,
}

fn enabled(net: &Net, m: &[u64], t: usize) -> bool {
    net.inputs(t)
        .iter()
        .all(|&(p, w)| m[p] == OMEGA || m[p] >= u64::from(w))
}

fn fire(net: &Net, m: &[u64], t: usize) -> Vec<u64> {
    let mut next = m.to_vec();
    for &(p, w) in net.inputs(t) {
        if next[p] != OMEGA {
            next[p] -= u64::from(w);
        }
    }
    for &(p, w) in net.outputs(t) {
        if next[p] != OMEGA {
            next[p] = next[p].saturating_add(u64::from(w)).min(OMEGA - 1);
        }
    }
    next
}

fn covers(big: &[u64], small: &[u64]) -> bool {
    big.iter().zip(small).all(|(b, s)| b >= s)
}

/// Builds the coverability graph from `m0` with at most `cap` nodes.
///
/// A new marking that strictly covers a marking on its search-tree path
/// is accelerated: every place where it is larger becomes `OMEGA`. Nodes
/// with a marking already in the graph are merged.
pub fn coverability(net: &Net, m0: &Marking, cap: usize) -> Coverability {
    let root: Vec<u64> = m0.as_slice().iter().map(|&x| u64::from(x)).collect();
    let mut nodes = IndexSet::from([root]);
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut fired = vec![false; net.transition_count()];
    let mut queue = VecDeque::from([0usize]);

    while let Some(n) = queue.pop_front() {
        for t in 0..net.transition_count() {
            if !enabled(net, &nodes[n], t) {
                continue;
            }
            fired[t] = true;
            let mut next = fire(net, &nodes[n], t);
            loop {
                let mut changed = false;
                let mut cursor = Some(n);
                while let Some(a) = cursor {
                    let anc = &nodes[a];
                    if covers(&next, anc) && next != *anc {
                        for (v, &old) in next.iter_mut().zip(anc) {
                            if *v != OMEGA && *v > old {
                                *v = OMEGA;
                                changed = true;
                            }
                        }
                    }
                    cursor = parent[a];
                }
                if !changed {
                    break;
                }
            }
            if nodes.contains(&next) {
                continue;
            }
            if nodes.len() >= cap {
                return Coverability {
                    fired,
                    nodes: nodes.len(),
                    complete: false,
                };
            }
            let (j, _) = nodes.insert_full(next);
            parent.push(Some(n));
            queue.push_back(j);
        }
    }
    Coverability {
        fired,
        nodes: nodes.len(),
        complete: true,
    }
}
