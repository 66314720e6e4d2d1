//! Cross-checking the built-in verdict with an external SPIN installation.
//!
//! For each property a single-claim model is emitted into a scratch
//! directory, then `spin -a`, `cc -o pan pan.c` and `./pan -a -N <claim>`
//! run in turn. The `errors: N` line of the verifier output decides the
//! outcome; on failure the trail is replayed with `spin -t -p` and the
//! `TR[i]` increments are mapped back to transition identifiers.

use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Serialize;
use thiserror::Error;

use crate::petri::Tokens;
use crate::promela::{emit_model, EmitError, EmitOptions, EmittedModel, Property, Variant};
use crate::statespace::Verdict;
use crate::wfnet::Workflow;

/// Environment variable consulted when no explicit binary is given.
pub const SPIN_ENV: &str = "WFNET_SPIN";

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("SPIN executable not found ({0}); install SPIN, pass --spin PATH or set WFNET_SPIN")]
    NotFound(String),
    #[error("{step} failed: {message}")]
    Tool { step: &'static str, message: String },
    #[error("could not interpret the output of {step}")]
    Unparseable { step: &'static str, raw: String },
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("scratch directory: {0}")]
    Io(#[from] std::io::Error),
}

/// Resolves the SPIN binary from an explicit path, then `WFNET_SPIN`, then `PATH`.
pub fn locate_spin(explicit: Option<&Path>) -> Result<PathBuf, SpinError> {
    if let Some(p) = explicit {
        return resolve(p.as_os_str())
            .ok_or_else(|| SpinError::NotFound(format!("`{}` does not exist", p.display())));
    }
    if let Some(v) = std::env::var_os(SPIN_ENV).filter(|v| !v.is_empty()) {
        return resolve(&v).ok_or_else(|| {
            SpinError::NotFound(format!("{SPIN_ENV}=`{}` does not exist", Path::new(&v).display()))
        });
    }
    resolve(OsStr::new("spin")).ok_or_else(|| SpinError::NotFound("`spin` is not on PATH".into()))
}

fn resolve(name: &OsStr) -> Option<PathBuf> {
    let p = Path::new(name);
    if p.components().count() > 1 || p.is_absolute() {
        return p.is_file().then(|| p.to_path_buf());
    }
    std::env::split_paths(&std::env::var_os("PATH")?)
        .map(|dir| dir.join(p))
        .find(|c| c.is_file())
}

/// Outcome of one external verification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinRun {
    pub property: Property,
    pub pass: bool,
    pub errors: usize,
    /// Transition identifiers along the counterexample, when one was replayed.
    pub trail: Option<Vec<String>>,
}

/// Reads the error count from the `errors: N` line of `pan` output.
pub fn parse_errors(output: &str) -> Option<usize> {
    output.lines().find_map(|line| {
        let rest = &line[line.find("errors:")? + "errors:".len()..];
        rest.split_whitespace().next()?.parse().ok()
    })
}

/// Extracts the sequence of `TR[i]` increments from a `spin -t -p` replay.
pub fn parse_trail(output: &str) -> Vec<usize> {
    let mut fired = Vec::new();
    for line in output.lines() {
        let mut rest = line;
        while let Some(pos) = rest.find("TR[") {
            rest = &rest[pos + 3..];
            let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
            let Ok(index) = digits.parse::<usize>() else {
                continue;
            };
            let after = &rest[digits.len()..];
            let increment = after.starts_with("]++")
                || after.starts_with(&format!("] = (TR[{digits}]+1)"))
                || after.starts_with(&format!("] = TR[{digits}]+1"));
            if increment {
                fired.push(index);
                break;
            }
        }
    }
    fired
}

fn run(step: &'static str, cmd: &mut Command) -> Result<Output, SpinError> {
    let out = cmd.output().map_err(|e| SpinError::Tool {
        step,
        message: e.to_string(),
    })?;
    if !out.status.success() {
        return Err(SpinError::Tool {
            step,
            message: format!(
                "{}\n{}{}",
                out.status,
                String::from_utf8_lossy(&out.stdout),
                String::from_utf8_lossy(&out.stderr)
            ),
        });
    }
    Ok(out)
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

/// Emits the model checked for `property`: the closure net for `no_dead`,
/// the workflow net otherwise, with only that property's claim.
pub fn model_for<W: Workflow>(w: &W, k: Tokens, property: Property) -> Result<EmittedModel, EmitError> {
    let weighted = w.net().arcs().iter().any(|a| a.weight > 1);
    let variant = if property == Property::NoDead {
        Variant::Closure
    } else {
        Variant::Plain
    };
    emit_model(
        w,
        &EmitOptions {
            k,
            variant,
            weighted,
            properties: vec![property],
        },
    )
}

/// Runs the external verifier on one property.
pub fn verify_property<W: Workflow>(
    spin: &Path,
    w: &W,
    k: Tokens,
    property: Property,
) -> Result<SpinRun, SpinError> {
    let model = model_for(w, k, property)?;
    let dir = tempfile::tempdir()?;
    let pml = dir.path().join("model.pml");
    std::fs::write(&pml, &model.text)?;

    run(
        "spin -a",
        Command::new(spin)
            .arg("-a")
            .arg("model.pml")
            .current_dir(dir.path()),
    )?;
    run(
        "cc",
        Command::new("cc")
            .args(["-o", "pan", "pan.c"])
            .current_dir(dir.path()),
    )?;
    let pan = Command::new(dir.path().join("pan"))
        .args(["-a", "-N", property.ltl_name()])
        .current_dir(dir.path())
        .output()
        .map_err(|e| SpinError::Tool {
            step: "pan",
            message: e.to_string(),
        })?;
    let pan_text = text(&pan);
    let errors = parse_errors(&pan_text).ok_or(SpinError::Unparseable {
        step: "pan",
        raw: pan_text.clone(),
    })?;
    let trail = if errors > 0 {
        let replay = run(
            "spin -t -p",
            Command::new(spin)
                .args(["-t", "-p", "model.pml"])
                .current_dir(dir.path()),
        )?;
        let names = parse_trail(&text(&replay))
            .into_iter()
            .map(|i| {
                model
                    .maps
                    .transitions
                    .iter()
                    .find(|&&(_, idx)| idx == i)
                    .map_or_else(|| format!("TR[{i}]"), |(name, _)| name.clone())
            })
            .collect();
        Some(names)
    } else {
        None
    };
    Ok(SpinRun {
        property,
        pass: errors == 0,
        errors,
        trail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    /// The outcomes differ in a way explained by the LTL reading of the property.
    KnownDivergence,
    Disagree,
    /// The built-in checker left the condition undetermined.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub property: Property,
    pub builtin: Option<bool>,
    pub spin: bool,
    pub agreement: Agreement,
    pub note: Option<String>,
    pub trail: Option<Vec<String>>,
}

/// Built-in outcome of the condition checked by `property`.
pub fn builtin_outcome(v: &Verdict, property: Property) -> Option<bool> {
    match property {
        Property::Termination => v.termination.as_ref().map(|c| c.pass),
        Property::Proper => v.proper.as_ref().map(|c| c.pass),
        Property::NoDead => v.no_dead.as_ref().map(|c| c.pass),
    }
}

/// Compares the built-in verdict with an external run.
///
/// `<> term` holds when every run eventually marks the sink, whereas the
/// option to complete asks that the final marking stay reachable from
/// every reachable marking. The two differ on nets with cycles (a run may
/// loop forever without fairness) and on nets where the sink is marked
/// with tokens left behind. `<> live` likewise requires every run to fire
/// every transition, which is stronger than the absence of dead
/// transitions. Differences on these two properties are reported as known
/// divergences; a difference on `proper` is a genuine disagreement.
pub fn compare(v: &Verdict, run: &SpinRun) -> Comparison {
    let builtin = builtin_outcome(v, run.property);
    let (agreement, note) = match builtin {
        None => (Agreement::Undetermined, None),
        Some(b) if b == run.pass => (Agreement::Agree, None),
        Some(_) => match run.property {
            Property::Termination => (
                Agreement::KnownDivergence,
                Some(
                    "known semantic divergence: `<> term` quantifies over all runs without \
                     fairness, while option to complete only requires the final marking to \
                     stay reachable"
                        .to_string(),
                ),
            ),
            Property::NoDead => (
                Agreement::KnownDivergence,
                Some(
                    "known semantic divergence: `<> live` asks every run to fire every \
                     transition, while no_dead only requires each transition to be enabled \
                     in some reachable marking"
                        .to_string(),
                ),
            ),
            Property::Proper => (
                Agreement::Disagree,
                Some("built-in and external verdicts differ on proper completion".to_string()),
            ),
        },
    };
    Comparison {
        property: run.property,
        builtin,
        spin: run.pass,
        agreement,
        note,
        trail: run.trail.clone(),
    }
}
