//! The `wfnet-verify` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::io::{load_document, serialize_report, serialize_validation, LoadedWorkflow, ReportFormat};
use crate::petri::Tokens;
use crate::promela::{emit_model, EmitOptions, IndexMaps, Property, Variant};
use crate::spin::{compare, locate_spin, verify_property, Agreement, Comparison, SpinError};
use crate::statespace::{SoundnessResult, DEFAULT_CAP};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const WEAK_SOUND: i32 = 3;
    pub const UNSOUND: i32 = 4;
    pub const UNBOUNDED: i32 = 5;
    pub const INCONCLUSIVE: i32 = 6;
    pub const SPIN_NOT_FOUND: i32 = 7;
    pub const SPIN_UNPARSEABLE: i32 = 8;
    pub const SPIN_DISAGREES: i32 = 9;
}

/// Exit code reported by `check` for a verdict category.
pub fn exit_code(result: SoundnessResult) -> i32 {
    match result {
        SoundnessResult::Sound => exit::OK,
        SoundnessResult::WeakSound => exit::WEAK_SOUND,
        SoundnessResult::Unsound => exit::UNSOUND,
        SoundnessResult::Unbounded => exit::UNBOUNDED,
        SoundnessResult::Inconclusive { .. } => exit::INCONCLUSIVE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wfnet-verify",
    version,
    about = "Soundness checking for workflow nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check the structural workflow-net conditions.
    Validate(InputArgs),
    /// Decide soundness on the reachability graph.
    Check(CheckArgs),
    /// Generate a Promela model.
    Emit(EmitArgs),
    /// Compare the built-in verdict with an external SPIN run.
    SpinCheck(SpinArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Net file (`.wfn`, or `.pnml`/`.xml` for PNML).
    input: PathBuf,
    /// Output format for reports and index maps.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of instances initially in the source place.
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Maximum number of distinct markings to explore.
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    cap: usize,
}

#[derive(Debug, Args)]
struct EmitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of instances initially in the source place.
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Emit the closure net with its `t*` transition.
    #[arg(long)]
    closure: bool,
    /// Use the weighted macro family.
    #[arg(long)]
    weighted: bool,
    /// Property to include (repeatable); defaults to termination and proper.
    #[arg(long = "property", value_enum)]
    properties: Vec<PropertyArg>,
    /// Output file; the model goes to standard output when absent.
    #[arg(short)]
    o: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpinArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of instances initially in the source place.
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Node bound for the built-in check.
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    cap: usize,
    /// Property to cross-check (repeatable); defaults to termination and proper.
    #[arg(long = "property", value_enum)]
    properties: Vec<PropertyArg>,
    /// SPIN executable; falls back to WFNET_SPIN, then PATH.
    #[arg(long)]
    spin: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Termination,
    Proper,
    #[value(name = "no_dead", alias = "nodead")]
    NoDead,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Property {
        match p {
            PropertyArg::Termination => Property::Termination,
            PropertyArg::Proper => Property::Proper,
            PropertyArg::NoDead => Property::NoDead,
        }
    }
}

fn parse_cap(s: &str) -> Result<usize, String> {
    let cap: usize = s.replace('_', "").parse().map_err(|e| format!("{e}"))?;
    if cap == 0 {
        return Err("cap must be at least 1".into());
    }
    Ok(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Validate,
    Check,
    Emit,
    SpinCheck,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: PathBuf,
    pub k: Tokens,
    pub cap: usize,
    pub format: ReportFormat,
    pub emit: EmitOptions,
    pub output: Option<PathBuf>,
    pub spin: Option<PathBuf>,
}

fn properties(args: &[PropertyArg]) -> Vec<Property> {
    if args.is_empty() {
        vec![Property::Termination, Property::Proper]
    } else {
        args.iter().map(|&p| p.into()).collect()
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> RunConfig {
        let format = |f: Format| match f {
            Format::Text => ReportFormat::Text,
            Format::Json => ReportFormat::Json,
        };
        let base = |command, input: InputArgs| RunConfig {
            command,
            input: input.input,
            k: 1,
            cap: DEFAULT_CAP,
            format: format(input.format),
            emit: EmitOptions::default(),
            output: None,
            spin: None,
        };
        match cli.command {
            Cmd::Validate(a) => base(CommandKind::Validate, a),
            Cmd::Check(a) => RunConfig {
                k: a.k,
                cap: a.cap,
                ..base(CommandKind::Check, a.input)
            },
            Cmd::Emit(a) => RunConfig {
                k: a.k,
                emit: EmitOptions {
                    k: a.k,
                    variant: if a.closure {
                        Variant::Closure
                    } else {
                        Variant::Plain
                    },
                    weighted: a.weighted,
                    properties: properties(&a.properties),
                },
                output: a.o,
                ..base(CommandKind::Emit, a.input)
            },
            Cmd::SpinCheck(a) => RunConfig {
                k: a.k,
                cap: a.cap,
                emit: EmitOptions {
                    k: a.k,
                    properties: properties(&a.properties),
                    ..EmitOptions::default()
                },
                spin: a.spin,
                ..base(CommandKind::SpinCheck, a.input)
            },
        }
    }
}

/// Parses arguments and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::ERROR } else { exit::OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    execute(&RunConfig::from(cli), out, err)
}

/// Runs a resolved configuration.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute_inner(cfg, out, err) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    fail(exit::ERROR, e)
}

enum Loaded {
    Valid(Box<LoadedWorkflow>),
    Invalid(i32),
}

/// Loads and validates the input. An invalid net has its report printed
/// to standard output.
fn load(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<Loaded, Failure> {
    let doc = load_document(&cfg.input).map_err(|e| fail(exit::ERROR, e))?;
    for w in &doc.warnings {
        writeln!(err, "warning: {w}").map_err(io_fail)?;
    }
    let (report, workflow) = doc.validate().map_err(|e| fail(exit::INVALID, e))?;
    match workflow {
        Some(w) if cfg.command != CommandKind::Validate => Ok(Loaded::Valid(Box::new(w))),
        _ => {
            out.write_all(serialize_validation(&report, cfg.format).as_bytes())
                .map_err(io_fail)?;
            Ok(Loaded::Invalid(if report.is_valid() {
                exit::OK
            } else {
                exit::INVALID
            }))
        }
    }
}

fn execute_inner(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let w = match load(cfg, out, err)? {
        Loaded::Valid(w) => *w,
        Loaded::Invalid(code) => return Ok(code),
    };
    match cfg.command {
        CommandKind::Validate => unreachable!("validate returns from load"),
        CommandKind::Check => {
            let verdict = w.check(cfg.k, cfg.cap).map_err(|e| fail(exit::ERROR, e))?;
            out.write_all(serialize_report(&verdict, cfg.format).as_bytes())
                .map_err(io_fail)?;
            Ok(exit_code(verdict.result))
        }
        CommandKind::Emit => {
            let model = emit_model(&w, &cfg.emit).map_err(|e| fail(exit::ERROR, e))?;
            let maps = render_maps(&model.maps, cfg.format);
            match &cfg.output {
                Some(path) => {
                    std::fs::write(path, &model.text)
                        .map_err(|e| fail(exit::ERROR, format!("cannot write {}: {e}", path.display())))?;
                    out.write_all(maps.as_bytes()).map_err(io_fail)?;
                }
                None => {
                    out.write_all(model.text.as_bytes()).map_err(io_fail)?;
                    err.write_all(maps.as_bytes()).map_err(io_fail)?;
                }
            }
            Ok(exit::OK)
        }
        CommandKind::SpinCheck => spin_check(cfg, &w, out, err),
    }
}

fn render_maps(maps: &IndexMaps, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(maps).expect("index maps serialize");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut s = String::from("places:\n");
            for (p, i) in &maps.places {
                let _ = writeln!(s, "  PL[{i}] {p}");
            }
            s.push_str("transitions:\n");
            for (t, i) in &maps.transitions {
                let _ = writeln!(s, "  TR[{i}] {t}");
            }
            s
        }
    }
}

#[derive(Serialize)]
struct SpinReport<'a> {
    result: &'static str,
    k: Tokens,
    properties: &'a [Comparison],
}

fn spin_check(
    cfg: &RunConfig,
    w: &LoadedWorkflow,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let spin = locate_spin(cfg.spin.as_deref()).map_err(|e| fail(exit::SPIN_NOT_FOUND, e))?;
    let verdict = w.check(cfg.k, cfg.cap).map_err(|e| fail(exit::ERROR, e))?;
    let mut comparisons = Vec::new();
    for &p in &cfg.emit.properties {
        match verify_property(&spin, w, cfg.k, p) {
            Ok(run) => comparisons.push(compare(&verdict, &run)),
            Err(SpinError::Unparseable { step, raw }) => {
                writeln!(err, "raw output of {step}:\n{raw}").map_err(io_fail)?;
                return Err(fail(
                    exit::SPIN_UNPARSEABLE,
                    format!("could not interpret the output of {step} for `{}`", p.as_str()),
                ));
            }
            Err(e) => return Err(fail(exit::ERROR, e)),
        }
    }
    let rendered = match cfg.format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&SpinReport {
                result: verdict.result.as_str(),
                k: cfg.k,
                properties: &comparisons,
            })
            .expect("spin report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut s = format!("built-in result: {}\n", verdict.result.as_str());
            let show = |b: Option<bool>| match b {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "undetermined",
            };
            for c in &comparisons {
                let agreement = match c.agreement {
                    Agreement::Agree => "agree",
                    Agreement::KnownDivergence => "known semantic divergence",
                    Agreement::Disagree => "DISAGREE",
                    Agreement::Undetermined => "built-in undetermined",
                };
                let _ = writeln!(
                    s,
                    "{}: built-in {}, spin {} ({agreement})",
                    c.property.as_str(),
                    show(c.builtin),
                    show(Some(c.spin))
                );
                if let Some(note) = &c.note {
                    let _ = writeln!(s, "  {note}");
                }
                if let Some(trail) = &c.trail {
                    let _ = writeln!(s, "  spin trail: {}", trail.join(" "));
                }
            }
            s
        }
    };
    out.write_all(rendered.as_bytes()).map_err(io_fail)?;
    if comparisons.iter().any(|c| c.agreement == Agreement::Disagree) {
        Ok(exit::SPIN_DISAGREES)
    } else {
        Ok(exit::OK)
    }
}
