//! Weighted place/transition nets and the token game.
//!
//! Places and transitions are addressed by dense indices in declaration
//! order; string identifiers are kept for diagnostics and output. Each
//! transition carries precomputed input and output weight vectors so that
//! enabledness and firing cost O(degree).

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Token count held by a single place.
pub type Tokens = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown {kind} index {index}")]
    UnknownIndex { kind: &'static str, index: usize },
    #[error("identifier `{0}` is declared twice")]
    DuplicateIdentifier(String),
    #[error("arc must connect place and transition: `{from}` -> `{to}`")]
    NotBipartite { from: String, to: String },
    #[error("duplicate arc `{from}` -> `{to}`")]
    DuplicateArc { from: String, to: String },
    #[error("arc `{from}` -> `{to}` has weight 0; weights must be at least 1")]
    ZeroWeight { from: String, to: String },
    #[error("marking has {found} entries but the net has {expected} places")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("token count overflow in place `{0}`")]
    TokenOverflow(String),
}

/// A node of the bipartite net graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Place(usize),
    Transition(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub source: Node,
    pub target: Node,
    pub weight: Tokens,
}

/// A weighted place/transition net `(P, T, F, W)`.
#[derive(Debug, Clone)]
pub struct Net {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: Vec<Arc>,
    lookup: HashMap<String, Node>,
    // per transition: (place, weight), sorted by place index
    inputs: Vec<Vec<(usize, Tokens)>>,
    outputs: Vec<Vec<(usize, Tokens)>>,
    // per place: transition indices, sorted
    place_pre: Vec<Vec<usize>>,
    place_post: Vec<Vec<usize>>,
}

impl PartialEq for Net {
    fn eq(&self, other: &Self) -> bool {
        self.places == other.places
            && self.transitions == other.transitions
            && self.inputs == other.inputs
            && self.outputs == other.outputs
    }
}

impl Eq for Net {}

/// Incremental constructor for [`Net`].
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: Vec<Arc>,
    lookup: HashMap<String, Node>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, id: &str) -> Result<usize, NetError> {
        if self.lookup.contains_key(id) {
            return Err(NetError::DuplicateIdentifier(id.to_string()));
        }
        let index = self.places.len();
        self.places.push(id.to_string());
        self.lookup.insert(id.to_string(), Node::Place(index));
        Ok(index)
    }

    pub fn add_transition(&mut self, id: &str) -> Result<usize, NetError> {
        if self.lookup.contains_key(id) {
            return Err(NetError::DuplicateIdentifier(id.to_string()));
        }
        let index = self.transitions.len();
        self.transitions.push(id.to_string());
        self.lookup.insert(id.to_string(), Node::Transition(index));
        Ok(index)
    }

    pub fn node(&self, id: &str) -> Result<Node, NetError> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| NetError::UnknownIdentifier(id.to_string()))
    }

    pub fn add_arc(&mut self, from: &str, to: &str, weight: Tokens) -> Result<(), NetError> {
        let source = self.node(from)?;
        let target = self.node(to)?;
        self.add_arc_between(source, target, weight)
    }

    pub fn add_arc_between(&mut self, source: Node, target: Node, weight: Tokens) -> Result<(), NetError> {
        for node in [source, target] {
            let (kind, index, len) = match node {
                Node::Place(p) => ("place", p, self.places.len()),
                Node::Transition(t) => ("transition", t, self.transitions.len()),
            };
            if index >= len {
                return Err(NetError::UnknownIndex { kind, index });
            }
        }
        let names = || (self.node_name(source), self.node_name(target));
        match (source, target) {
            (Node::Place(_), Node::Transition(_)) | (Node::Transition(_), Node::Place(_)) => {}
            _ => {
                let (from, to) = names();
                return Err(NetError::NotBipartite { from, to });
            }
        }
        if weight == 0 {
            let (from, to) = names();
            return Err(NetError::ZeroWeight { from, to });
        }
        if self.arcs.iter().any(|a| a.source == source && a.target == target) {
            let (from, to) = names();
            return Err(NetError::DuplicateArc { from, to });
        }
        self.arcs.push(Arc {
            source,
            target,
            weight,
        });
        Ok(())
    }

    fn node_name(&self, node: Node) -> String {
        match node {
            Node::Place(p) => self.places[p].clone(),
            Node::Transition(t) => self.transitions[t].clone(),
        }
    }

    pub fn build(self) -> Net {
        let mut inputs = vec![Vec::new(); self.transitions.len()];
        let mut outputs = vec![Vec::new(); self.transitions.len()];
        let mut place_pre = vec![Vec::new(); self.places.len()];
        let mut place_post = vec![Vec::new(); self.places.len()];
        for arc in &self.arcs {
            match (arc.source, arc.target) {
                (Node::Place(p), Node::Transition(t)) => {
                    inputs[t].push((p, arc.weight));
                    place_post[p].push(t);
                }
                (Node::Transition(t), Node::Place(p)) => {
                    outputs[t].push((p, arc.weight));
                    place_pre[p].push(t);
                }
                _ => unreachable!("builder rejects non-bipartite arcs"),
            }
        }
        for v in inputs.iter_mut().chain(outputs.iter_mut()) {
            v.sort_unstable();
        }
        for v in place_pre.iter_mut().chain(place_post.iter_mut()) {
            v.sort_unstable();
        }
        Net {
            places: self.places,
            transitions: self.transitions,
            arcs: self.arcs,
            lookup: self.lookup,
            inputs,
            outputs,
            place_pre,
            place_post,
        }
    }
}

impl Net {
    pub fn builder() -> NetBuilder {
        NetBuilder::new()
    }

    /// Builds a net from identifier lists and `(from, to, weight)` arcs.
    pub fn from_parts(
        places: &[&str],
        transitions: &[&str],
        arcs: &[(&str, &str, Tokens)],
    ) -> Result<Net, NetError> {
        let mut b = NetBuilder::new();
        for p in places {
            b.add_place(p)?;
        }
        for t in transitions {
            b.add_transition(t)?;
        }
        for (from, to, w) in arcs {
            b.add_arc(from, to, *w)?;
        }
        Ok(b.build())
    }

    /// Returns a builder pre-populated with this net's nodes and arcs.
    pub fn to_builder(&self) -> NetBuilder {
        NetBuilder {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            arcs: self.arcs.clone(),
            lookup: self.lookup.clone(),
        }
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    /// Arcs in insertion order.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn place_name(&self, p: usize) -> &str {
        &self.places[p]
    }

    pub fn transition_name(&self, t: usize) -> &str {
        &self.transitions[t]
    }

    pub fn node_name(&self, node: Node) -> &str {
        match node {
            Node::Place(p) => &self.places[p],
            Node::Transition(t) => &self.transitions[t],
        }
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    pub fn node(&self, id: &str) -> Result<Node, NetError> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| NetError::UnknownIdentifier(id.to_string()))
    }

    pub fn place(&self, id: &str) -> Result<usize, NetError> {
        match self.node(id)? {
            Node::Place(p) => Ok(p),
            Node::Transition(_) => Err(NetError::UnknownIdentifier(id.to_string())),
        }
    }

    pub fn transition(&self, id: &str) -> Result<usize, NetError> {
        match self.node(id)? {
            Node::Transition(t) => Ok(t),
            Node::Place(_) => Err(NetError::UnknownIdentifier(id.to_string())),
        }
    }

    fn check_node(&self, node: Node) -> Result<(), NetError> {
        match node {
            Node::Place(p) if p >= self.places.len() => Err(NetError::UnknownIndex {
                kind: "place",
                index: p,
            }),
            Node::Transition(t) if t >= self.transitions.len() => Err(NetError::UnknownIndex {
                kind: "transition",
                index: t,
            }),
            _ => Ok(()),
        }
    }

    fn check_marking(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() != self.places.len() {
            return Err(NetError::DimensionMismatch {
                expected: self.places.len(),
                found: m.len(),
            });
        }
        Ok(())
    }

    /// `•x`: sources of all arcs targeting `node`, in index order.
    pub fn preset(&self, node: Node) -> Result<Vec<Node>, NetError> {
        self.check_node(node)?;
        Ok(match node {
            Node::Place(p) => self.place_pre[p].iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.inputs[t].iter().map(|&(p, _)| Node::Place(p)).collect(),
        })
    }

    /// `x•`: targets of all arcs leaving `node`, in index order.
    pub fn postset(&self, node: Node) -> Result<Vec<Node>, NetError> {
        self.check_node(node)?;
        Ok(match node {
            Node::Place(p) => self.place_post[p].iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.outputs[t].iter().map(|&(p, _)| Node::Place(p)).collect(),
        })
    }

    /// Input places of `t` with arc weights, sorted by place index.
    pub fn inputs(&self, t: usize) -> &[(usize, Tokens)] {
        &self.inputs[t]
    }

    /// Output places of `t` with arc weights, sorted by place index.
    pub fn outputs(&self, t: usize) -> &[(usize, Tokens)] {
        &self.outputs[t]
    }

    /// Transitions producing into place `p`.
    pub fn place_preset(&self, p: usize) -> &[usize] {
        &self.place_pre[p]
    }

    /// Transitions consuming from place `p`.
    pub fn place_postset(&self, p: usize) -> &[usize] {
        &self.place_post[p]
    }

    /// `W(x, y)`, zero when there is no arc.
    pub fn weight(&self, source: Node, target: Node) -> Tokens {
        match (source, target) {
            (Node::Place(p), Node::Transition(t)) => lookup_weight(self.inputs.get(t), p),
            (Node::Transition(t), Node::Place(p)) => lookup_weight(self.outputs.get(t), p),
            _ => 0,
        }
    }

    /// True when every arc has weight 1.
    pub fn is_ordinary(&self) -> bool {
        self.arcs.iter().all(|a| a.weight == 1)
    }

    pub fn is_enabled(&self, m: &Marking, t: usize) -> Result<bool, NetError> {
        self.check_node(Node::Transition(t))?;
        self.check_marking(m)?;
        Ok(self.enabled_unchecked(m, t))
    }

    pub(crate) fn enabled_unchecked(&self, m: &Marking, t: usize) -> bool {
        self.inputs[t].iter().all(|&(p, w)| m.0[p] >= w)
    }

    /// Fires `t`, returning the successor marking `M' = M - W(·,t) + W(t,·)`.
    pub fn fire(&self, m: &Marking, t: usize) -> Result<Marking, NetError> {
        if !self.is_enabled(m, t)? {
            return Err(NetError::NotEnabled(self.transitions[t].clone()));
        }
        self.fire_unchecked(m, t)
    }

    /// Fires an enabled transition. Only overflow is reported.
    pub(crate) fn fire_unchecked(&self, m: &Marking, t: usize) -> Result<Marking, NetError> {
        let mut next = m.0.clone();
        for &(p, w) in &self.inputs[t] {
            next[p] -= w;
        }
        for &(p, w) in &self.outputs[t] {
            next[p] = next[p]
                .checked_add(w)
                .ok_or_else(|| NetError::TokenOverflow(self.places[p].clone()))?;
        }
        Ok(Marking(next))
    }

    /// All enabled transitions in index order.
    pub fn enabled_transitions(&self, m: &Marking) -> Result<Vec<usize>, NetError> {
        self.check_marking(m)?;
        Ok((0..self.transitions.len())
            .filter(|&t| self.enabled_unchecked(m, t))
            .collect())
    }
}

fn lookup_weight(row: Option<&Vec<(usize, Tokens)>>, p: usize) -> Tokens {
    row.and_then(|r| r.iter().find(|&&(q, _)| q == p))
        .map_or(0, |&(_, w)| w)
}

/// Token count per place, indexed like [`Net::places`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<Tokens>);

impl Marking {
    pub fn new(tokens: Vec<Tokens>) -> Self {
        Marking(tokens)
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: usize) -> Tokens {
        self.0[p]
    }

    pub fn set(&mut self, p: usize, tokens: Tokens) {
        self.0[p] = tokens;
    }

    pub fn as_slice(&self) -> &[Tokens] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Tokens> {
        self.0
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Marking) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self <= other` everywhere and `self < other` somewhere.
    pub fn strictly_below(&self, other: &Marking) -> bool {
        self.le(other) && self.0 != other.0
    }
}

impl From<Vec<Tokens>> for Marking {
    fn from(v: Vec<Tokens>) -> Self {
        Marking(v)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("]")
    }
}

impl Serialize for Marking {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}
