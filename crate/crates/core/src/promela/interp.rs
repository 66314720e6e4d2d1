//! A small interpreter for the Promela subset produced by
//! [`emit_model`](super::emit_model).
//!
//! It reads the macro definitions, the `PL`/`TR` declarations, the `init`
//! assignments and the `do` branches back out of the model text, expands
//! macro calls textually, and executes each branch as guard plus updates.
//! Exploring the result gives the state space SPIN would see (over `PL`
//! only), independently of the Petri-net firing code.

use std::collections::{HashMap, VecDeque};

use indexmap::IndexSet;
use thiserror::Error;

/// A `(from, transition, to)` step between explored states.
pub type Edge = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{0}` declaration")]
    MissingDeclaration(&'static str),
    #[error("index {index} out of bounds for {array}[{len}]")]
    OutOfBounds {
        array: &'static str,
        index: usize,
        len: usize,
    },
    #[error("branch {0} has no fire() statement")]
    NoFire(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Op {
    Guard(Vec<(usize, Cmp, i64)>),
    True,
    AddPl(usize, i64),
    IncTr(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub transition: usize,
    ops: Vec<Op>,
}

/// The executable content of an emitted model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub pl_len: usize,
    pub tr_len: usize,
    pub init: Vec<i64>,
    pub branches: Vec<Branch>,
}

struct Macro {
    params: Vec<String>,
    body: String,
}

fn syntax(line: usize, message: impl Into<String>) -> InterpError {
    InterpError::Syntax {
        line,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Replaces whole-identifier occurrences of `params` with `args`.
fn substitute(body: &str, params: &[String], args: &[&str]) -> String {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start + c.len_utf8();
            while let Some(&(i, d)) = chars.peek() {
                if !is_ident_char(d) {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let word = &body[start..end];
            match params.iter().position(|p| p == word) {
                Some(k) => out.push_str(args[k]),
                None => out.push_str(word),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn expand(text: &str, macros: &HashMap<String, Macro>, line: usize) -> Result<String, InterpError> {
    let mut out = String::new();
    let mut rest = text;
    loop {
        let next_call = macros
            .keys()
            .filter_map(|name| {
                let pat = format!("{name}(");
                let mut from = 0;
                while let Some(pos) = rest[from..].find(&pat) {
                    let at = from + pos;
                    let boundary = rest[..at].chars().next_back().is_none_or(|c| !is_ident_char(c));
                    if boundary {
                        return Some((at, name.as_str()));
                    }
                    from = at + pat.len();
                }
                None
            })
            .min();
        let Some((at, name)) = next_call else {
            out.push_str(rest);
            return Ok(out);
        };
        out.push_str(&rest[..at]);
        let open = at + name.len() + 1;
        let close = rest[open..]
            .find(')')
            .map(|c| open + c)
            .ok_or_else(|| syntax(line, format!("unterminated call to `{name}`")))?;
        let args: Vec<&str> = rest[open..close].split(',').map(str::trim).collect();
        let m = &macros[name];
        if args.len() != m.params.len() {
            return Err(syntax(
                line,
                format!("`{name}` expects {} arguments", m.params.len()),
            ));
        }
        out.push_str(&substitute(&m.body, &m.params, &args));
        rest = &rest[close + 1..];
    }
}

fn parse_index(s: &str, array: &str, line: usize) -> Result<usize, InterpError> {
    let inner = s
        .trim()
        .strip_prefix(array)
        .and_then(|r| r.strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| syntax(line, format!("expected {array}[..] in `{s}`")))?;
    inner
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad index in `{s}`")))
}

fn parse_number(s: &str, line: usize) -> Result<i64, InterpError> {
    s.trim()
        .parse()
        .map_err(|_| syntax(line, format!("expected a number, found `{s}`")))
}

fn parse_condition(s: &str, line: usize) -> Result<(usize, Cmp, i64), InterpError> {
    let (lhs, cmp, rhs) = if let Some((l, r)) = s.split_once(">=") {
        (l, Cmp::Ge, r)
    } else if let Some((l, r)) = s.split_once('>') {
        (l, Cmp::Gt, r)
    } else {
        return Err(syntax(line, format!("unsupported condition `{s}`")));
    };
    Ok((parse_index(lhs, "PL", line)?, cmp, parse_number(rhs, line)?))
}

fn parse_statement(s: &str, line: usize) -> Result<Op, InterpError> {
    let s = s.trim();
    if s == "true" {
        return Ok(Op::True);
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let conds = inner
            .split("&&")
            .map(|c| parse_condition(c, line))
            .collect::<Result<_, _>>()?;
        return Ok(Op::Guard(conds));
    }
    if let Some(target) = s.strip_suffix("++") {
        return if target.trim_start().starts_with("TR") {
            Ok(Op::IncTr(parse_index(target, "TR", line)?))
        } else {
            Ok(Op::AddPl(parse_index(target, "PL", line)?, 1))
        };
    }
    if let Some(target) = s.strip_suffix("--") {
        return Ok(Op::AddPl(parse_index(target, "PL", line)?, -1));
    }
    if let Some((lhs, rhs)) = s.split_once('=') {
        let p = parse_index(lhs, "PL", line)?;
        let (base, sign, amount) = if let Some((b, n)) = rhs.split_once('-') {
            (b, -1, n)
        } else if let Some((b, n)) = rhs.split_once('+') {
            (b, 1, n)
        } else {
            return Err(syntax(line, format!("unsupported assignment `{s}`")));
        };
        if parse_index(base, "PL", line)? != p {
            return Err(syntax(line, format!("cross-place assignment `{s}`")));
        }
        return Ok(Op::AddPl(p, sign * parse_number(amount, line)?));
    }
    Err(syntax(line, format!("unsupported statement `{s}`")))
}

fn parse_declaration(line_text: &str, array: &str, line: usize) -> Result<usize, InterpError> {
    let decl = line_text
        .strip_prefix("int ")
        .and_then(|r| r.strip_suffix(';'))
        .ok_or_else(|| syntax(line, "malformed declaration"))?;
    parse_index(decl, array, line)
}

impl Program {
    /// Parses an emitted model.
    pub fn parse(text: &str) -> Result<Program, InterpError> {
        let mut macros = HashMap::new();
        let mut pl_len = None;
        let mut tr_len = None;
        let mut assignments = Vec::new();
        let mut branches = Vec::new();
        let mut in_loop = false;

        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let l = raw.trim();
            if let Some(def) = l.strip_prefix("#define ") {
                // function-like macros only; propositions are not executed
                let Some(paren) = def.find('(') else { continue };
                let name = &def[..paren];
                if name.contains(' ') {
                    continue;
                }
                let close = def
                    .find(')')
                    .ok_or_else(|| syntax(line, "unterminated macro parameters"))?;
                let params = def[paren + 1..close]
                    .split(',')
                    .map(|p| p.trim().to_string())
                    .collect();
                let body = def[close + 1..].trim().to_string();
                macros.insert(name.to_string(), Macro { params, body });
            } else if l.starts_with("int PL[") {
                pl_len = Some(parse_declaration(l, "PL", line)?);
            } else if l.starts_with("int TR[") {
                tr_len = Some(parse_declaration(l, "TR", line)?);
            } else if l == "do" {
                in_loop = true;
            } else if l == "od" {
                in_loop = false;
            } else if in_loop {
                let body = l
                    .strip_prefix(":: atomic {")
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| syntax(line, "expected `:: atomic { ... }`"))?;
                let expanded = expand(body, &macros, line)?;
                let ops = expanded
                    .split("->")
                    .flat_map(|part| part.split(';'))
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_statement(s, line))
                    .collect::<Result<Vec<_>, _>>()?;
                let transition = ops
                    .iter()
                    .find_map(|op| match op {
                        Op::IncTr(j) => Some(*j),
                        _ => None,
                    })
                    .ok_or(InterpError::NoFire(branches.len()))?;
                branches.push(Branch { transition, ops });
            } else if l.starts_with("PL[") {
                let stmt = l.strip_suffix(';').ok_or_else(|| syntax(line, "expected `;`"))?;
                let (lhs, rhs) = stmt
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected an assignment"))?;
                assignments.push((parse_index(lhs, "PL", line)?, parse_number(rhs, line)?));
            }
        }

        let pl_len = pl_len.ok_or(InterpError::MissingDeclaration("PL"))?;
        let tr_len = tr_len.ok_or(InterpError::MissingDeclaration("TR"))?;
        let mut init = vec![0; pl_len];
        for (p, v) in assignments {
            *init.get_mut(p).ok_or(InterpError::OutOfBounds {
                array: "PL",
                index: p,
                len: pl_len,
            })? = v;
        }
        let program = Program {
            pl_len,
            tr_len,
            init,
            branches,
        };
        program.check_bounds()?;
        Ok(program)
    }

    fn check_bounds(&self) -> Result<(), InterpError> {
        let pl = |index| InterpError::OutOfBounds {
            array: "PL",
            index,
            len: self.pl_len,
        };
        for b in &self.branches {
            for op in &b.ops {
                match op {
                    Op::Guard(conds) => {
                        for &(p, _, _) in conds {
                            if p >= self.pl_len {
                                return Err(pl(p));
                            }
                        }
                    }
                    Op::AddPl(p, _) if *p >= self.pl_len => return Err(pl(*p)),
                    Op::IncTr(t) if *t >= self.tr_len => {
                        return Err(InterpError::OutOfBounds {
                            array: "TR",
                            index: *t,
                            len: self.tr_len,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Executes `branch` on `state`; `None` when its guard blocks.
    pub fn step(&self, state: &[i64], branch: usize) -> Option<Vec<i64>> {
        let ops = &self.branches[branch].ops;
        let holds = |conds: &[(usize, Cmp, i64)], s: &[i64]| {
            conds.iter().all(|&(p, cmp, v)| match cmp {
                Cmp::Gt => s[p] > v,
                Cmp::Ge => s[p] >= v,
            })
        };
        let mut next = state.to_vec();
        for (i, op) in ops.iter().enumerate() {
            match op {
                Op::True | Op::IncTr(_) => {}
                Op::Guard(conds) => {
                    if !holds(conds, &next) {
                        // only the leading guard may block an atomic sequence
                        debug_assert_eq!(i, 0, "blocking guard inside atomic block");
                        return None;
                    }
                }
                Op::AddPl(p, d) => next[*p] += d,
            }
        }
        Some(next)
    }

    /// Breadth-first exploration over `PL` valuations, trying branches in
    /// textual order. Returns the states in discovery order and the
    /// `(from, transition, to)` edges.
    pub fn explore(&self, cap: usize) -> (Vec<Vec<i64>>, Vec<Edge>) {
        let mut states = IndexSet::from([self.init.clone()]);
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let state = states[i].clone();
            for (b, branch) in self.branches.iter().enumerate() {
                if let Some(next) = self.step(&state, b) {
                    let (j, fresh) = states.insert_full(next);
                    if fresh {
                        if states.len() > cap {
                            return (states.into_iter().collect(), edges);
                        }
                        queue.push_back(j);
                    }
                    edges.push((i, branch.transition, j));
                }
            }
        }
        (states.into_iter().collect(), edges)
    }
}
