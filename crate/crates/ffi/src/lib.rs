//! C ABI for the workflow-net checker.
//!
//! Nets and verdicts are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a
//! [`WfnetStatus`]; on failure a message is kept per thread and can be read
//! with [`wfnet_last_error`]. Strings handed out by the library are
//! released with [`wfnet_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wfnet_core::io::{
    load_document, parse_dsl, parse_pnml, serialize_report, serialize_validation, LoadError, NetDocument,
    ReportFormat,
};
use wfnet_core::promela::{emit_model, EmitOptions, Property, Variant};
use wfnet_core::statespace::{SoundnessResult, Verdict, DEFAULT_CAP};

/// Outcome of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfnetStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The net text could not be parsed.
    ParseError = 3,
    /// A file could not be read.
    IoError = 4,
    /// The net is not a workflow net.
    InvalidNet = 5,
    /// A numeric or option argument is out of range.
    InvalidArgument = 6,
    /// State-space exploration failed.
    CheckFailed = 7,
    /// The Promela model could not be generated.
    EmitFailed = 8,
    /// An internal error was caught at the boundary.
    Panic = 9,
}

/// Soundness classification of a verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfnetResult {
    Sound = 0,
    WeakSound = 1,
    Unsound = 2,
    Unbounded = 3,
    Inconclusive = 4,
}

/// Report rendering.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfnetFormat {
    Text = 0,
    Json = 1,
}

/// Property bit for `wfnet_net_emit`: option to complete.
pub const WFNET_PROPERTY_TERMINATION: u32 = 1;
/// Property bit for `wfnet_net_emit`: proper completion.
pub const WFNET_PROPERTY_PROPER: u32 = 2;
/// Property bit for `wfnet_net_emit`: no dead transitions (closure only).
pub const WFNET_PROPERTY_NO_DEAD: u32 = 4;

/// A parsed net with its source, sink and resource declarations.
pub struct WfnetNet {
    doc: NetDocument,
}

/// The result of a soundness check.
pub struct WfnetVerdict {
    verdict: Verdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure {
    status: WfnetStatus,
    message: String,
}

fn fail<T>(status: WfnetStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        status,
        message: message.into(),
    })
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WfnetStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WfnetStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".to_string());
            set_last_error(message);
            WfnetStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(WfnetStatus::NullArgument, format!("`{name}` is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(e) => fail(WfnetStatus::InvalidUtf8, format!("`{name}` is not UTF-8: {e}")),
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(WfnetStatus::NullArgument, format!("`{name}` is null")),
    }
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return fail(WfnetStatus::NullArgument, format!("`{name}` is null"));
    }
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    match CString::new(s) {
        Ok(c) => Ok(c.into_raw()),
        Err(_) => fail(WfnetStatus::Panic, "output contains an interior NUL byte"),
    }
}

fn report_format(f: WfnetFormat) -> ReportFormat {
    match f {
        WfnetFormat::Text => ReportFormat::Text,
        WfnetFormat::Json => ReportFormat::Json,
    }
}

unsafe fn store_net(doc: NetDocument, out: *mut *mut WfnetNet) {
    *out = Box::into_raw(Box::new(WfnetNet { doc }));
}

/// Parses a net in the line-oriented text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` receives a handle to release with `wfnet_net_free`.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_parse_dsl(text: *const c_char, out: *mut *mut WfnetNet) -> WfnetStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        match parse_dsl(text) {
            Ok(doc) => {
                store_net(doc, out);
                Ok(())
            }
            Err(e) => fail(WfnetStatus::ParseError, e.to_string()),
        }
    })
}

/// Parses a PNML document.
///
/// # Safety
/// Same contract as `wfnet_net_parse_dsl`.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_parse_pnml(text: *const c_char, out: *mut *mut WfnetNet) -> WfnetStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        match parse_pnml(text) {
            Ok(doc) => {
                store_net(doc, out);
                Ok(())
            }
            Err(e) => fail(WfnetStatus::ParseError, e.to_string()),
        }
    })
}

/// Reads a net from a file; `.pnml` and `.xml` files are read as PNML,
/// anything else as the text format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_load(path: *const c_char, out: *mut *mut WfnetNet) -> WfnetStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        match load_document(Path::new(path)) {
            Ok(doc) => {
                store_net(doc, out);
                Ok(())
            }
            Err(e @ LoadError::Io { .. }) => fail(WfnetStatus::IoError, e.to_string()),
            Err(e @ LoadError::Parse { .. }) => fail(WfnetStatus::ParseError, e.to_string()),
        }
    })
}

/// Releases a net handle. Null is ignored.
///
/// # Safety
/// `net` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_free(net: *mut WfnetNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of places, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_place_count(net: *const WfnetNet) -> usize {
    net.as_ref().map_or(0, |n| n.doc.net.place_count())
}

/// Number of transitions, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_transition_count(net: *const WfnetNet) -> usize {
    net.as_ref().map_or(0, |n| n.doc.net.transition_count())
}

/// Number of warnings raised while reading the net.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_warning_count(net: *const WfnetNet) -> usize {
    net.as_ref().map_or(0, |n| n.doc.warnings.len())
}

/// Checks the structural workflow-net conditions.
///
/// `*valid` receives the outcome. When `report` is not null it receives
/// the structural report, to release with `wfnet_string_free`.
///
/// # Safety
/// `net` must be a live handle, `valid` a valid pointer and `report` null
/// or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_validate(
    net: *const WfnetNet,
    format: WfnetFormat,
    valid: *mut bool,
    report: *mut *mut c_char,
) -> WfnetStatus {
    guard(|| {
        let net = ref_arg(net, "net")?;
        out_arg(valid, "valid")?;
        let (structural, _) = match net.doc.validate() {
            Ok(r) => r,
            Err(e) => return fail(WfnetStatus::InvalidNet, e.to_string()),
        };
        *valid = structural.is_valid();
        if !report.is_null() {
            *report = into_c_string(serialize_validation(&structural, report_format(format)))?;
        }
        Ok(())
    })
}

/// Decides soundness with `k` instances, exploring at most `cap` markings
/// per state space (`0` selects the default bound of one million).
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer. On success
/// `*out` receives a handle to release with `wfnet_verdict_free`.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_check(
    net: *const WfnetNet,
    k: u32,
    cap: usize,
    out: *mut *mut WfnetVerdict,
) -> WfnetStatus {
    guard(|| {
        let net = ref_arg(net, "net")?;
        out_arg(out, "out")?;
        if k == 0 {
            return fail(
                WfnetStatus::InvalidArgument,
                "the number of instances k must be at least 1",
            );
        }
        let workflow = match net.doc.validate() {
            Ok((_, Some(w))) => w,
            Ok((report, None)) => {
                return fail(WfnetStatus::InvalidNet, format!("not a workflow net\n{report}"))
            }
            Err(e) => return fail(WfnetStatus::InvalidNet, e.to_string()),
        };
        let cap = if cap == 0 { DEFAULT_CAP } else { cap };
        match workflow.check(k, cap) {
            Ok(verdict) => {
                *out = Box::into_raw(Box::new(WfnetVerdict { verdict }));
                Ok(())
            }
            Err(e) => fail(WfnetStatus::CheckFailed, e.to_string()),
        }
    })
}

/// Soundness classification of a verdict.
///
/// # Safety
/// `verdict` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wfnet_verdict_result(
    verdict: *const WfnetVerdict,
    out: *mut WfnetResult,
) -> WfnetStatus {
    guard(|| {
        let v = ref_arg(verdict, "verdict")?;
        out_arg(out, "out")?;
        *out = match v.verdict.result {
            SoundnessResult::Sound => WfnetResult::Sound,
            SoundnessResult::WeakSound => WfnetResult::WeakSound,
            SoundnessResult::Unsound => WfnetResult::Unsound,
            SoundnessResult::Unbounded => WfnetResult::Unbounded,
            SoundnessResult::Inconclusive { .. } => WfnetResult::Inconclusive,
        };
        Ok(())
    })
}

/// Number of markings explored in the workflow net's state space.
///
/// # Safety
/// `verdict` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wfnet_verdict_nodes(verdict: *const WfnetVerdict) -> usize {
    verdict.as_ref().map_or(0, |v| v.verdict.stats.nodes)
}

/// Renders the verdict as a report, to release with `wfnet_string_free`.
///
/// # Safety
/// `verdict` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wfnet_verdict_report(
    verdict: *const WfnetVerdict,
    format: WfnetFormat,
    out: *mut *mut c_char,
) -> WfnetStatus {
    guard(|| {
        let v = ref_arg(verdict, "verdict")?;
        out_arg(out, "out")?;
        *out = into_c_string(serialize_report(&v.verdict, report_format(format)))?;
        Ok(())
    })
}

/// Releases a verdict handle. Null is ignored.
///
/// # Safety
/// `verdict` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wfnet_verdict_free(verdict: *mut WfnetVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}

/// Generates the Promela model of the net.
///
/// `properties` is a mask of `WFNET_PROPERTY_*` bits; `0` selects
/// termination and proper completion. The model is written to `*out`, to
/// release with `wfnet_string_free`.
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wfnet_net_emit(
    net: *const WfnetNet,
    k: u32,
    closure: bool,
    weighted: bool,
    properties: u32,
    out: *mut *mut c_char,
) -> WfnetStatus {
    guard(|| {
        let net = ref_arg(net, "net")?;
        out_arg(out, "out")?;
        let known = WFNET_PROPERTY_TERMINATION | WFNET_PROPERTY_PROPER | WFNET_PROPERTY_NO_DEAD;
        if properties & !known != 0 {
            return fail(
                WfnetStatus::InvalidArgument,
                format!("unknown property bits {properties:#x}"),
            );
        }
        let workflow = match net.doc.validate() {
            Ok((_, Some(w))) => w,
            Ok((report, None)) => {
                return fail(WfnetStatus::InvalidNet, format!("not a workflow net\n{report}"))
            }
            Err(e) => return fail(WfnetStatus::InvalidNet, e.to_string()),
        };
        let mut opts = EmitOptions {
            k,
            variant: if closure { Variant::Closure } else { Variant::Plain },
            weighted,
            ..EmitOptions::default()
        };
        if properties != 0 {
            opts.properties = [
                (WFNET_PROPERTY_TERMINATION, Property::Termination),
                (WFNET_PROPERTY_PROPER, Property::Proper),
                (WFNET_PROPERTY_NO_DEAD, Property::NoDead),
            ]
            .into_iter()
            .filter(|(bit, _)| properties & bit != 0)
            .map(|(_, p)| p)
            .collect();
        }
        match emit_model(&workflow, &opts) {
            Ok(model) => {
                *out = into_c_string(model.text)?;
                Ok(())
            }
            Err(e) => fail(WfnetStatus::EmitFailed, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wfnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn wfnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wfnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
