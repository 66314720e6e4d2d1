//! Net input formats and report output.

mod document;
mod dsl;
mod pnml;
mod report;

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use document::{LoadedWorkflow, NetDocument};
pub use dsl::{parse_dsl, serialize_dsl};
pub use pnml::parse_pnml;
pub use report::{serialize_report, serialize_validation, ReportFormat};

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
}

/// Reads a `.wfn` or `.pnml` file, choosing the parser by extension
/// (anything other than `.pnml`/`.xml` is treated as the line format).
pub fn load_document(path: &Path) -> Result<NetDocument, LoadError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: shown.clone(),
        source,
    })?;
    let is_xml = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pnml") || e.eq_ignore_ascii_case("xml"));
    let parsed = if is_xml {
        parse_pnml(&text)
    } else {
        parse_dsl(&text)
    };
    let mut doc = parsed.map_err(|source| LoadError::Parse { path: shown, source })?;
    doc.origin = Some(path.to_path_buf());
    Ok(doc)
}
