//! Promela model generation.
//!
//! The marking lives in an integer array `PL` (source at index 0, sink at
//! the last index) and firing counts in `TR`. The `init` process loops over
//! one atomic guarded branch per transition:
//!
//! ```text
//! :: atomic { remove2(0,3) -> fire(1); add1(4) }
//! ```
//!
//! `removeN` tests and consumes, `fire` counts, `addN` produces. Nets with
//! arc weights above one use the `removeWN`/`addWN` family, which take the
//! weights after the places. Soundness properties are emitted as `#define`
//! propositions plus one named `ltl` block per property.

pub mod interp;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::petri::{Net, Tokens};
use crate::wfnet::{closure, Workflow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("the number of instances k must be at least 1")]
    ZeroInstances,
    #[error("the no_dead property is defined on the closure net; enable the closure variant")]
    NoDeadNeedsClosure,
    #[error("arc `{from}` -> `{to}` has weight {weight}; use the weighted macro family")]
    WeightedArc {
        from: String,
        to: String,
        weight: Tokens,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// The workflow net `N` itself.
    #[default]
    Plain,
    /// The closure net `N*`.
    Closure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Termination,
    Proper,
    NoDead,
}

impl Property {
    pub const ALL: [Property; 3] = [Property::Termination, Property::Proper, Property::NoDead];

    /// Name of the `ltl` block.
    pub fn ltl_name(self) -> &'static str {
        match self {
            Property::Termination => "termination",
            Property::Proper => "proper",
            Property::NoDead => "nodead",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Termination => "termination",
            Property::Proper => "proper",
            Property::NoDead => "no_dead",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        match s {
            "termination" => Some(Property::Termination),
            "proper" => Some(Property::Proper),
            "no_dead" | "nodead" => Some(Property::NoDead),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    pub k: Tokens,
    pub variant: Variant,
    pub weighted: bool,
    pub properties: Vec<Property>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            k: 1,
            variant: Variant::Plain,
            weighted: false,
            properties: vec![Property::Termination, Property::Proper],
        }
    }
}

impl EmitOptions {
    fn validate(&self) -> Result<(), EmitError> {
        if self.k == 0 {
            return Err(EmitError::ZeroInstances);
        }
        if self.properties.contains(&Property::NoDead) && self.variant != Variant::Closure {
            return Err(EmitError::NoDeadNeedsClosure);
        }
        Ok(())
    }

    fn sorted_properties(&self) -> Vec<Property> {
        let mut ps = self.properties.clone();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// Identifier-to-array-index assignments, listed in index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexMaps {
    pub places: Vec<(String, usize)>,
    pub transitions: Vec<(String, usize)>,
}

impl IndexMaps {
    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.iter().find(|(p, _)| p == id).map(|&(_, i)| i)
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions.iter().find(|(t, _)| t == id).map(|&(_, i)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedModel {
    pub text: String,
    pub maps: IndexMaps,
    pub properties: Vec<Property>,
}

/// Net-place-index to `PL`-index permutation: source first, sink last,
/// everything else in declaration order.
struct Layout {
    pl_of: Vec<usize>,
}

impl Layout {
    fn new<W: Workflow>(w: &W) -> Layout {
        let wf = w.wfnet();
        let n = wf.net().place_count();
        let mut pl_of = vec![0; n];
        let mut next = 1;
        for (p, slot) in pl_of.iter_mut().enumerate() {
            if p == wf.source() {
                *slot = 0;
            } else if p == wf.sink() {
                *slot = n - 1;
            } else {
                *slot = next;
                next += 1;
            }
        }
        Layout { pl_of }
    }

    fn places_by_pl(&self) -> Vec<usize> {
        let mut by_pl = vec![0; self.pl_of.len()];
        for (p, &i) in self.pl_of.iter().enumerate() {
            by_pl[i] = p;
        }
        by_pl
    }
}

/// Source to 0, sink to `|P|-1`, other places in declaration order;
/// transitions in declaration order with `t*` last for the closure.
pub fn render_index_maps<W: Workflow>(w: &W, variant: Variant) -> IndexMaps {
    let layout = Layout::new(w);
    let net = w.net();
    let places = layout
        .places_by_pl()
        .into_iter()
        .enumerate()
        .map(|(i, p)| (net.place_name(p).to_string(), i))
        .collect();
    let emitted = emitted_net(w, variant);
    let transitions = emitted
        .transitions()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    IndexMaps { places, transitions }
}

fn emitted_net<W: Workflow>(w: &W, variant: Variant) -> Net {
    match variant {
        Variant::Plain => w.net().clone(),
        Variant::Closure => closure(w.wfnet()).net,
    }
}

fn params(prefix: char, arity: usize) -> Vec<String> {
    (1..=arity).map(|j| format!("{prefix}{j}")).collect()
}

/// `fire` plus the `remove`/`add` macro families up to the given arities.
pub fn emit_macros(max_remove: usize, max_add: usize, weighted: bool) -> String {
    let mut out = String::from("#define fire(t) TR[t]++\n");
    for a in 1..=max_remove {
        let ps = params('p', a);
        if weighted {
            let ns = params('n', a);
            let guard: Vec<String> = ps
                .iter()
                .zip(&ns)
                .map(|(p, n)| format!("PL[{p}] >= {n}"))
                .collect();
            let body: Vec<String> = ps
                .iter()
                .zip(&ns)
                .map(|(p, n)| format!("PL[{p}] = PL[{p}] - {n}"))
                .collect();
            let _ = writeln!(
                out,
                "#define removeW{a}({},{}) ({}) -> {}",
                ps.join(","),
                ns.join(","),
                guard.join(" && "),
                body.join("; ")
            );
        } else {
            let guard: Vec<String> = ps.iter().map(|p| format!("PL[{p}] > 0")).collect();
            let body: Vec<String> = ps.iter().map(|p| format!("PL[{p}]--")).collect();
            let _ = writeln!(
                out,
                "#define remove{a}({}) ({}) -> {}",
                ps.join(","),
                guard.join(" && "),
                body.join("; ")
            );
        }
    }
    for a in 1..=max_add {
        let ps = params('p', a);
        if weighted {
            let ns = params('n', a);
            let body: Vec<String> = ps
                .iter()
                .zip(&ns)
                .map(|(p, n)| format!("PL[{p}] = PL[{p}] + {n}"))
                .collect();
            let _ = writeln!(
                out,
                "#define addW{a}({},{}) {}",
                ps.join(","),
                ns.join(","),
                body.join("; ")
            );
        } else {
            let body: Vec<String> = ps.iter().map(|p| format!("PL[{p}]++")).collect();
            let _ = writeln!(out, "#define add{a}({}) {}", ps.join(","), body.join("; "));
        }
    }
    out
}

/// The `term`/`prop`/`live` propositions (`kterm`/`kprop` when `k > 1`)
/// needed by `properties`.
///
/// `prop` requires every non-sink place to hold its final count (zero, or
/// `R` for resource places) and the sink to hold exactly `k`. `live`
/// ranges over every transition of the closure net.
pub fn emit_property_defines<W: Workflow>(w: &W, k: Tokens, properties: &[Property]) -> String {
    let layout = Layout::new(w);
    let net = w.net();
    let n = net.place_count();
    let sink = n - 1;
    let (term, prop) = if k == 1 {
        ("term", "prop")
    } else {
        ("kterm", "kprop")
    };
    let mut out = String::new();
    let wants = |p: Property| properties.contains(&p);
    if wants(Property::Termination) || wants(Property::Proper) {
        let _ = writeln!(out, "#define {term} (PL[{sink}] >= {k})");
    }
    if wants(Property::Proper) {
        let mut expected = vec![0; n];
        for &(p, r) in w.resources() {
            expected[layout.pl_of[p]] = r;
        }
        expected[sink] = k;
        let conj: Vec<String> = expected
            .iter()
            .enumerate()
            .map(|(i, v)| format!("PL[{i}]=={v}"))
            .collect();
        let _ = writeln!(out, "#define {prop} ({})", conj.join(" && "));
    }
    if wants(Property::NoDead) {
        let m = net.transition_count() + 1;
        let conj: Vec<String> = (0..m).map(|j| format!("TR[{j}]>=1")).collect();
        let _ = writeln!(out, "#define live ({})", conj.join(" && "));
    }
    out
}

fn ltl_formula(p: Property, k: Tokens) -> String {
    let (term, prop) = if k == 1 {
        ("term", "prop")
    } else {
        ("kterm", "kprop")
    };
    match p {
        Property::Termination => format!("<> {term}"),
        Property::Proper => format!("[] ({term} -> {prop})"),
        Property::NoDead => "<> live".to_string(),
    }
}

/// Generates the complete Promela model.
pub fn emit_model<W: Workflow>(w: &W, opts: &EmitOptions) -> Result<EmittedModel, EmitError> {
    opts.validate()?;
    let net = emitted_net(w, opts.variant);
    if !opts.weighted {
        if let Some(a) = net.arcs().iter().find(|a| a.weight > 1) {
            return Err(EmitError::WeightedArc {
                from: net.node_name(a.source).to_string(),
                to: net.node_name(a.target).to_string(),
                weight: a.weight,
            });
        }
    }
    let layout = Layout::new(w);
    let properties = opts.sorted_properties();
    let t_count = net.transition_count();
    let max_remove = (0..t_count).map(|t| net.inputs(t).len()).max().unwrap_or(0);
    let max_add = (0..t_count).map(|t| net.outputs(t).len()).max().unwrap_or(0);

    let mut text = emit_macros(max_remove, max_add, opts.weighted);
    let defines = emit_property_defines(w, opts.k, &properties);
    if !defines.is_empty() {
        text.push('\n');
        text.push_str(&defines);
    }
    let _ = write!(
        text,
        "\nint PL[{}];\nint TR[{}];\n\ninit {{\n",
        net.place_count(),
        t_count
    );
    let _ = writeln!(text, "    PL[0] = {};", opts.k);
    let mut resources: Vec<(usize, Tokens)> =
        w.resources().iter().map(|&(p, r)| (layout.pl_of[p], r)).collect();
    resources.sort_unstable();
    for (i, r) in resources {
        let _ = writeln!(text, "    PL[{i}] = {r};");
    }
    text.push_str("    do\n");
    for t in 0..t_count {
        let _ = writeln!(
            text,
            "    :: atomic {{ {} }}",
            firing(&net, &layout, t, opts.weighted)
        );
    }
    text.push_str("    od\n}\n");
    if !properties.is_empty() {
        text.push('\n');
        for &p in &properties {
            let _ = writeln!(text, "ltl {} {{ {} }}", p.ltl_name(), ltl_formula(p, opts.k));
        }
    }

    Ok(EmittedModel {
        text,
        maps: render_index_maps(w, opts.variant),
        properties,
    })
}

fn call(family: &str, args: &[(usize, Tokens)], weighted: bool) -> String {
    let places: Vec<String> = args.iter().map(|(p, _)| p.to_string()).collect();
    if weighted {
        let weights: Vec<String> = args.iter().map(|(_, w)| w.to_string()).collect();
        format!(
            "{family}W{}({},{})",
            args.len(),
            places.join(","),
            weights.join(",")
        )
    } else {
        format!("{family}{}({})", args.len(), places.join(","))
    }
}

fn firing(net: &Net, layout: &Layout, t: usize, weighted: bool) -> String {
    let remap = |row: &[(usize, Tokens)]| {
        let mut v: Vec<(usize, Tokens)> = row.iter().map(|&(p, w)| (layout.pl_of[p], w)).collect();
        v.sort_unstable();
        v
    };
    let inputs = remap(net.inputs(t));
    let outputs = remap(net.outputs(t));
    let guard = if inputs.is_empty() {
        "true".to_string()
    } else {
        call("remove", &inputs, weighted)
    };
    let mut s = format!("{guard} -> fire({t})");
    if !outputs.is_empty() {
        s.push_str("; ");
        s.push_str(&call("add", &outputs, weighted));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfnet::{validate_wfrnet, WfNet, WfrNet};

    fn wf(places: &[&str], transitions: &[&str], arcs: &[(&str, &str, u32)]) -> WfNet {
        WfNet::from_net(Net::from_parts(places, transitions, arcs).unwrap()).unwrap()
    }

    fn seq2() -> WfNet {
        wf(
            &["i", "p1", "f"],
            &["t1", "t2"],
            &[("i", "t1", 1), ("t1", "p1", 1), ("p1", "t2", 1), ("t2", "f", 1)],
        )
    }

    fn k2net() -> WfNet {
        wf(
            &["i", "p1", "f"],
            &["t1", "t2"],
            &[("i", "t1", 2), ("t1", "p1", 1), ("p1", "t2", 1), ("t2", "f", 2)],
        )
    }

    fn res1() -> WfrNet {
        // sink declared before the resource and an interior place
        let net = Net::from_parts(
            &["i", "f", "r", "p1"],
            &["t1", "t2"],
            &[
                ("i", "t1", 1),
                ("r", "t1", 1),
                ("t1", "p1", 1),
                ("p1", "t2", 1),
                ("t2", "f", 1),
                ("t2", "r", 1),
            ],
        )
        .unwrap();
        validate_wfrnet(net, None, None, &[("r", 2)])
            .unwrap()
            .into_result()
            .unwrap()
    }

    fn branches(text: &str) -> Vec<&str> {
        text.lines()
            .map(str::trim)
            .filter(|l| l.starts_with(":: atomic"))
            .collect()
    }

    #[test]
    fn seq2_branches() {
        let m = emit_model(
            &seq2(),
            &EmitOptions {
                properties: vec![Property::Termination],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            branches(&m.text),
            [
                ":: atomic { remove1(0) -> fire(0); add1(1) }",
                ":: atomic { remove1(1) -> fire(1); add1(2) }"
            ]
        );
        assert!(m.text.contains("int TR[2];"));
        assert!(m.text.contains("ltl termination { <> term }"));
        assert!(!m.text.contains("ltl proper"));
    }

    #[test]
    fn closure_adds_star_branch() {
        let m = emit_model(
            &seq2(),
            &EmitOptions {
                variant: Variant::Closure,
                properties: vec![Property::NoDead],
                ..Default::default()
            },
        )
        .unwrap();
        let b = branches(&m.text);
        assert_eq!(b.len(), 3);
        assert_eq!(b[2], ":: atomic { remove1(2) -> fire(2); add1(0) }");
        assert!(m.text.contains("int TR[3];"));
        assert!(m.text.contains("#define live (TR[0]>=1 && TR[1]>=1 && TR[2]>=1)"));
        assert!(m.text.contains("ltl nodead { <> live }"));
    }

    #[test]
    fn weighted_branches() {
        let m = emit_model(
            &k2net(),
            &EmitOptions {
                weighted: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            branches(&m.text)[0],
            ":: atomic { removeW1(0,2) -> fire(0); addW1(1,1) }"
        );
        assert!(m
            .text
            .contains("#define removeW1(p1,n1) (PL[p1] >= n1) -> PL[p1] = PL[p1] - n1"));
    }

    #[test]
    fn option_errors() {
        assert_eq!(
            emit_model(&k2net(), &EmitOptions::default()).unwrap_err(),
            EmitError::WeightedArc {
                from: "i".into(),
                to: "t1".into(),
                weight: 2
            }
        );
        assert_eq!(
            emit_model(
                &seq2(),
                &EmitOptions {
                    properties: vec![Property::NoDead],
                    ..Default::default()
                }
            )
            .unwrap_err(),
            EmitError::NoDeadNeedsClosure
        );
        assert_eq!(
            emit_model(
                &seq2(),
                &EmitOptions {
                    k: 0,
                    ..Default::default()
                }
            )
            .unwrap_err(),
            EmitError::ZeroInstances
        );
    }

    #[test]
    fn macros() {
        let m = emit_macros(2, 1, false);
        assert_eq!(
            m,
            "#define fire(t) TR[t]++\n\
             #define remove1(p1) (PL[p1] > 0) -> PL[p1]--\n\
             #define remove2(p1,p2) (PL[p1] > 0 && PL[p2] > 0) -> PL[p1]--; PL[p2]--\n\
             #define add1(p1) PL[p1]++\n"
        );
        let w = emit_macros(2, 2, true);
        assert!(w.contains(
            "#define removeW2(p1,p2,n1,n2) (PL[p1] >= n1 && PL[p2] >= n2) -> PL[p1] = PL[p1] - n1; PL[p2] = PL[p2] - n2\n"
        ));
        assert!(w.contains("#define addW2(p1,p2,n1,n2) PL[p1] = PL[p1] + n1; PL[p2] = PL[p2] + n2\n"));
        assert!(!w.contains("#define remove1("));
    }

    #[test]
    fn property_defines() {
        let all = [Property::Termination, Property::Proper];
        let d = emit_property_defines(&seq2(), 1, &all);
        assert_eq!(
            d,
            "#define term (PL[2] >= 1)\n#define prop (PL[0]==0 && PL[1]==0 && PL[2]==1)\n"
        );
        let d = emit_property_defines(&seq2(), 3, &all);
        assert!(d.contains("#define kterm (PL[2] >= 3)"));
        assert!(d.contains("#define kprop (PL[0]==0 && PL[1]==0 && PL[2]==3)"));

        let five = wf(
            &["i", "a", "b", "c", "f"],
            &["t1", "t2"],
            &[
                ("i", "t1", 1),
                ("t1", "a", 1),
                ("t1", "b", 1),
                ("t1", "c", 1),
                ("a", "t2", 1),
                ("b", "t2", 1),
                ("c", "t2", 1),
                ("t2", "f", 1),
            ],
        );
        assert!(emit_property_defines(&five, 1, &all).starts_with("#define term (PL[4] >= 1)\n"));
    }

    #[test]
    fn resource_prop_expects_r() {
        let d = emit_property_defines(&res1(), 1, &[Property::Proper]);
        // PL order: i, r, p1, f
        assert!(d.contains("#define prop (PL[0]==0 && PL[1]==2 && PL[2]==0 && PL[3]==1)"));
        let m = emit_model(&res1(), &EmitOptions::default()).unwrap();
        assert!(m.text.contains("    PL[0] = 1;\n    PL[1] = 2;\n"));
    }

    #[test]
    fn index_maps() {
        let maps = render_index_maps(&seq2(), Variant::Plain);
        assert_eq!(
            maps.places,
            [("i".to_string(), 0), ("p1".to_string(), 1), ("f".to_string(), 2)]
        );
        assert_eq!(maps.transitions, [("t1".to_string(), 0), ("t2".to_string(), 1)]);
        let maps = render_index_maps(&seq2(), Variant::Closure);
        assert_eq!(maps.transition_index("t*"), Some(2));

        let maps = render_index_maps(&res1(), Variant::Plain);
        let names: Vec<&str> = maps.places.iter().map(|(p, _)| p.as_str()).collect();
        assert_eq!(names, ["i", "r", "p1", "f"]);
    }

    #[test]
    fn empty_preset_and_postset_branches() {
        // not a workflow net, but the emitter stays total over raw layouts
        let wfn = seq2();
        let mut b = wfn.net().to_builder();
        b.add_transition("gen").unwrap();
        b.add_arc("gen", "p1", 1).unwrap();
        b.add_transition("sinkhole").unwrap();
        b.add_arc("p1", "sinkhole", 1).unwrap();
        let net = b.build();
        let layout = Layout { pl_of: vec![0, 1, 2] };
        assert_eq!(firing(&net, &layout, 2, false), "true -> fire(2); add1(1)");
        assert_eq!(firing(&net, &layout, 3, false), "remove1(1) -> fire(3)");
    }

    #[test]
    fn emission_is_deterministic() {
        let o = EmitOptions {
            variant: Variant::Closure,
            properties: Property::ALL.to_vec(),
            ..Default::default()
        };
        assert_eq!(emit_model(&seq2(), &o).unwrap(), emit_model(&seq2(), &o).unwrap());
    }
}
