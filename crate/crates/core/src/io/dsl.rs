//! The line-oriented `.wfn` format.
//!
//! ```text
//! net order_handling
//! place i
//! place p1
//! place f
//! transition t1
//! transition t2
//! arc i -> t1
//! arc t1 -> p1 * 2      # weight 2
//! arc p1 -> t2 * 2
//! arc t2 -> f
//! source i              # optional, detected when absent
//! sink f
//! resource r = 1        # marks r as a resource place with R(r) = 1
//! ```
//!
//! Identifiers are ASCII letters, digits and `_`. Everything after `#` is
//! a comment. Identifiers must be declared before they are referenced.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::io::{NetDocument, ParseError};
use crate::petri::{NetBuilder, NetError, Tokens};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    Arrow,
    Star,
    Equals,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let column = i + 1;
        match c {
            b'#' => break,
            b' ' | b'\t' | b'\r' => i += 1,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Arrow, column));
                i += 2;
            }
            b'*' => {
                out.push((Tok::Star, column));
                i += 1;
            }
            b'=' => {
                out.push((Tok::Equals, column));
                i += 1;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Word(&line[start..i]), column));
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(
                    lineno,
                    column,
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn word(&mut self, what: &str) -> Result<(&'a str, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(&(Tok::Word(w), col)) => {
                self.pos += 1;
                Ok((w, col))
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok<'static>, what: &str) -> Result<(), ParseError> {
        if self.toks.get(self.pos).map(|t| &t.0) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{what}`")))
        }
    }

    fn number(&mut self, what: &str) -> Result<(Tokens, usize), ParseError> {
        let (w, col) = self.word(what)?;
        w.parse::<Tokens>()
            .map(|n| (n, col))
            .map_err(|_| ParseError::new(self.line, col, format!("expected {what}, found `{w}`")))
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

fn net_error(line: usize, column: usize, e: NetError) -> ParseError {
    ParseError::new(line, column, e.to_string())
}

/// Parses the `.wfn` line format.
pub fn parse_dsl(text: &str) -> Result<NetDocument, ParseError> {
    let mut builder = NetBuilder::new();
    let mut name = None;
    let mut source: Option<String> = None;
    let mut sink: Option<String> = None;
    let mut resources: Vec<(String, Tokens)> = Vec::new();
    let mut resource_ids = HashSet::new();
    let mut lines = std::collections::HashMap::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line,
            end_column: raw.len() + 1,
        };
        let (keyword, kw_col) = p.word("a keyword")?;
        match keyword {
            "net" => {
                let (id, col) = p.word("a net name")?;
                if name.is_some() {
                    return Err(ParseError::new(line, col, "duplicate `net` declaration"));
                }
                name = Some(id.to_string());
            }
            "place" | "transition" => {
                let (id, col) = p.word("an identifier")?;
                let added = if keyword == "place" {
                    builder.add_place(id)
                } else {
                    builder.add_transition(id)
                };
                added.map_err(|e| net_error(line, col, e))?;
                lines.insert(id.to_string(), line);
            }
            "arc" => {
                let (from, from_col) = p.word("the arc source")?;
                p.expect(Tok::Arrow, "->")?;
                let (to, to_col) = p.word("the arc target")?;
                let weight = if p.pos < p.toks.len() {
                    p.expect(Tok::Star, "*")?;
                    let (w, col) = p.number("a weight")?;
                    if w < 1 {
                        return Err(ParseError::new(line, col, "arc weight must be at least 1"));
                    }
                    w
                } else {
                    1
                };
                let from_node = builder.node(from).map_err(|e| net_error(line, from_col, e))?;
                let to_node = builder.node(to).map_err(|e| net_error(line, to_col, e))?;
                builder
                    .add_arc_between(from_node, to_node, weight)
                    .map_err(|e| net_error(line, from_col, e))?;
            }
            "source" | "sink" => {
                let (id, col) = p.word("a place identifier")?;
                let slot = if keyword == "source" {
                    &mut source
                } else {
                    &mut sink
                };
                if slot.is_some() {
                    return Err(ParseError::new(
                        line,
                        kw_col,
                        format!("duplicate `{keyword}` declaration"),
                    ));
                }
                require_place(&builder, id, line, col)?;
                *slot = Some(id.to_string());
            }
            "resource" => {
                let (id, col) = p.word("a place identifier")?;
                p.expect(Tok::Equals, "=")?;
                let (count, _) = p.number("a token count")?;
                require_place(&builder, id, line, col)?;
                if !resource_ids.insert(id.to_string()) {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!("resource `{id}` is declared twice"),
                    ));
                }
                resources.push((id.to_string(), count));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    kw_col,
                    format!("unknown keyword `{other}`"),
                ))
            }
        }
        p.finish()?;
    }

    let mut doc = NetDocument::new(builder.build());
    doc.name = name;
    doc.source = source;
    doc.sink = sink;
    doc.resources = resources;
    doc.lines = lines;
    Ok(doc)
}

fn require_place(builder: &NetBuilder, id: &str, line: usize, col: usize) -> Result<(), ParseError> {
    match builder.node(id) {
        Ok(crate::petri::Node::Place(_)) => Ok(()),
        Ok(_) => Err(ParseError::new(line, col, format!("`{id}` is not a place"))),
        Err(e) => Err(net_error(line, col, e)),
    }
}

/// Writes a document back in the `.wfn` format.
pub fn serialize_dsl(doc: &NetDocument) -> String {
    let net = &doc.net;
    let mut out = String::new();
    if let Some(name) = &doc.name {
        let _ = writeln!(out, "net {name}");
    }
    for p in net.places() {
        let _ = writeln!(out, "place {p}");
    }
    for t in net.transitions() {
        let _ = writeln!(out, "transition {t}");
    }
    for arc in net.arcs() {
        let _ = write!(
            out,
            "arc {} -> {}",
            net.node_name(arc.source),
            net.node_name(arc.target)
        );
        if arc.weight != 1 {
            let _ = write!(out, " * {}", arc.weight);
        }
        out.push('\n');
    }
    if let Some(s) = &doc.source {
        let _ = writeln!(out, "source {s}");
    }
    if let Some(s) = &doc.sink {
        let _ = writeln!(out, "sink {s}");
    }
    for (r, n) in &doc.resources {
        let _ = writeln!(out, "resource {r} = {n}");
    }
    out
}
