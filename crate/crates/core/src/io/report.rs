//! Text and JSON renderings of verdicts and structural reports.

use std::fmt::Write as _;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::petri::{Marking, Tokens};
use crate::statespace::{ConditionOutcome, SoundnessResult, Trace, Verdict};
use crate::wfnet::{StructuralReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

/// Serializes ordered `(key, value)` pairs as a JSON object.
struct Pairs<'a, V>(&'a [(String, V)]);

impl<V: Serialize> Serialize for Pairs<'_, V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    result: &'static str,
    conditions: JsonConditions<'a>,
    stats: JsonStats,
    parameters: JsonParameters<'a>,
    witness: Option<JsonWitness<'a>>,
}

#[derive(Serialize)]
struct JsonConditions<'a> {
    termination: JsonCondition<'a>,
    proper: JsonCondition<'a>,
    no_dead: JsonNoDead<'a>,
}

#[derive(Serialize)]
struct JsonCondition<'a> {
    pass: Option<bool>,
    counterexample: Option<&'a [String]>,
}

#[derive(Serialize)]
struct JsonNoDead<'a> {
    pass: Option<bool>,
    dead: Option<&'a [String]>,
}

#[derive(Serialize)]
struct JsonStats {
    nodes: usize,
    edges: usize,
    millis: u128,
}

#[derive(Serialize)]
struct JsonParameters<'a> {
    k: Tokens,
    resources: Pairs<'a, Tokens>,
}

#[derive(Serialize)]
struct JsonWitness<'a> {
    in_closure: bool,
    places: &'a [String],
    ancestor: &'a Marking,
    descendant: &'a Marking,
    trace: &'a [String],
}

fn json_condition(c: &Option<ConditionOutcome>) -> JsonCondition<'_> {
    JsonCondition {
        pass: c.as_ref().map(|c| c.pass),
        counterexample: c
            .as_ref()
            .map(|c| c.counterexample.as_ref().map_or(&[][..], |t| &t.names[..])),
    }
}

fn verdict_json(v: &Verdict) -> JsonReport<'_> {
    JsonReport {
        result: v.result.as_str(),
        conditions: JsonConditions {
            termination: json_condition(&v.termination),
            proper: json_condition(&v.proper),
            no_dead: JsonNoDead {
                pass: v.no_dead.as_ref().map(|d| d.pass),
                dead: v.no_dead.as_ref().map(|d| &d.names[..]),
            },
        },
        stats: JsonStats {
            nodes: v.stats.nodes,
            edges: v.stats.edges,
            millis: v.stats.elapsed.as_millis(),
        },
        parameters: JsonParameters {
            k: v.k,
            resources: Pairs(&v.resources),
        },
        witness: v.witness.as_ref().map(|w| JsonWitness {
            in_closure: w.in_closure,
            places: &v.places,
            ancestor: &w.ancestor,
            descendant: &w.descendant,
            trace: &w.trace.names,
        }),
    }
}

/// Renders a marking as its non-empty places, e.g. `p1 + 2*f`.
pub(crate) fn named_marking(places: &[String], m: &Marking) -> String {
    let parts: Vec<String> = m
        .as_slice()
        .iter()
        .zip(places)
        .filter(|(n, _)| **n > 0)
        .map(|(n, p)| if *n == 1 { p.clone() } else { format!("{n}*{p}") })
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

fn trace_text(places: &[String], t: &Trace) -> String {
    if t.is_empty() {
        format!(
            "empty trace, at the initial marking {}",
            named_marking(places, &t.end)
        )
    } else {
        format!(
            "{} (reaches {})",
            t.names.join(" "),
            named_marking(places, &t.end)
        )
    }
}

fn condition_text(out: &mut String, places: &[String], label: &str, c: &Option<ConditionOutcome>) {
    match c {
        None => {
            let _ = writeln!(out, "{label}: undetermined");
        }
        Some(c) => {
            let _ = writeln!(out, "{label}: {}", if c.pass { "pass" } else { "fail" });
            if let Some(t) = &c.counterexample {
                let _ = writeln!(out, "  counterexample: {}", trace_text(places, t));
            }
        }
    }
}

fn verdict_text(v: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "result: {}", v.result.as_str());
    if let SoundnessResult::Inconclusive { cap } = v.result {
        let _ = writeln!(
            out,
            "  state cap of {cap} markings reached before the search finished"
        );
    }
    let _ = write!(out, "parameters: k = {}", v.k);
    if !v.resources.is_empty() {
        let rs: Vec<String> = v.resources.iter().map(|(r, n)| format!("{r} = {n}")).collect();
        let _ = write!(out, ", resources {}", rs.join(", "));
    }
    out.push('\n');
    let _ = writeln!(out, "initial marking: {}", named_marking(&v.places, &v.initial));
    let _ = writeln!(
        out,
        "final marking: {}",
        named_marking(&v.places, &v.final_marking)
    );
    condition_text(&mut out, &v.places, "termination", &v.termination);
    condition_text(&mut out, &v.places, "proper", &v.proper);
    match &v.no_dead {
        None => {
            let _ = writeln!(out, "no_dead: undetermined");
        }
        Some(d) => {
            let _ = writeln!(out, "no_dead: {}", if d.pass { "pass" } else { "fail" });
            if !d.names.is_empty() {
                let _ = writeln!(out, "  dead transitions: {}", d.names.join(", "));
            }
        }
    }
    if let Some(w) = &v.witness {
        let net = if w.in_closure { "closure net" } else { "net" };
        let _ = writeln!(out, "unbounded in the {net}:");
        let _ = writeln!(out, "  ancestor:   {}", named_marking(&v.places, &w.ancestor));
        let _ = writeln!(out, "  descendant: {}", named_marking(&v.places, &w.descendant));
        let trace = if w.trace.is_empty() {
            "(empty)".to_string()
        } else {
            w.trace.names.join(" ")
        };
        let _ = writeln!(out, "  trace: {trace}");
    }
    let _ = writeln!(
        out,
        "stats: {} markings, {} edges, {} ms",
        v.stats.nodes,
        v.stats.edges,
        v.stats.elapsed.as_millis()
    );
    out
}

/// Serializes a verdict. JSON output is pretty-printed with a trailing newline.
pub fn serialize_report(v: &Verdict, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => verdict_text(v),
        ReportFormat::Json => {
            let mut s =
                serde_json::to_string_pretty(&verdict_json(v)).expect("verdict serialization cannot fail");
            s.push('\n');
            s
        }
    }
}

#[derive(Serialize)]
struct JsonValidation<'a> {
    valid: bool,
    source: Option<&'a str>,
    sink: Option<&'a str>,
    violations: &'a [Violation],
}

/// Serializes a structural validation report.
pub fn serialize_validation(report: &StructuralReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&JsonValidation {
                valid: report.is_valid(),
                source: report.source.as_deref(),
                sink: report.sink.as_deref(),
                violations: &report.violations,
            })
            .expect("report serialization cannot fail");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let show = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".to_string());
            if report.is_valid() {
                let _ = writeln!(out, "valid workflow net");
            } else {
                let _ = writeln!(out, "not a workflow net");
            }
            let _ = writeln!(out, "source: {}", show(&report.source));
            let _ = writeln!(out, "sink: {}", show(&report.sink));
            for v in &report.violations {
                let _ = writeln!(out, "{v}");
            }
            out
        }
    }
}
