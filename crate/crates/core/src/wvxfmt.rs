//! The `.wvx` experiment description format.
//!
//! One directive per line, fields separated by whitespace, `#` starts a
//! comment:
//!
//! ```text
//! # wvx v1
//! dim 2
//! name canonical
//! pre 0 1 0
//! pre 1 1 0
//! post 0 2 0
//! post 1 -1 0
//! component 1 atten 0.05
//! ```
//!
//! `name` takes the rest of its line verbatim (comments are not stripped
//! there). Amplitudes are normalized at load. Several `component` lines on
//! one path multiply into a single element, but a `(path, kind)` pair may
//! appear only once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::backaction::{ComponentKind, ComponentSet, PathComponent};
use crate::error::Error as CoreError;
use crate::qstate::StateVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("index {index} is out of range for dim {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{0} state has no nonzero amplitude")]
    ZeroState(&'static str),
    #[error("duplicate directive: {0}")]
    DuplicateDirective(String),
}

/// A rejected `.wvx` input, positioned at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self {
            line,
            col,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }
}

/// A parsed and normalized experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub dim: usize,
    pub name: Option<String>,
    pub pre: StateVector,
    pub post: StateVector,
    pub components: ComponentSet,
}

impl ExperimentSpec {
    pub fn new(
        name: Option<String>,
        pre: StateVector,
        post: StateVector,
        components: ComponentSet,
    ) -> Result<Self, CoreError> {
        let dim = pre.dim();
        if post.dim() != dim {
            return Err(CoreError::DimMismatch {
                expected: dim,
                found: post.dim(),
            });
        }
        components.check_paths(dim)?;
        if let Some(n) = &name {
            if n.is_empty() || n.contains(['\n', '\r']) || n.trim() != n {
                return Err(CoreError::InvalidName(format!("{n:?}")));
            }
        }
        Ok(Self {
            dim,
            name,
            pre,
            post,
            components,
        })
    }

    /// Equality up to `tol` on every amplitude and multiplier.
    pub fn structurally_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol);
        self.dim == other.dim
            && self.name == other.name
            && close(self.pre.amplitudes(), other.pre.amplitudes())
            && close(self.post.amplitudes(), other.post.amplitudes())
            && self.components.len() == other.components.len()
            && self.components.iter().zip(other.components.iter()).all(|(a, b)| {
                a.path_index == b.path_index && a.kind == b.kind && (a.c - b.c).norm() <= tol
            })
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    text: &line[b..byte],
                    col: c,
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &line[b..],
            col: c,
        });
    }
    out
}

fn parse_index(tok: &Token, line: usize) -> Result<usize, ParseError> {
    tok.text
        .parse()
        .map_err(|_| ParseError::syntax(line, tok.col, format!("expected an index, found {:?}", tok.text)))
}

fn parse_real(tok: &Token, line: usize) -> Result<f64, ParseError> {
    match tok.text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ParseError::syntax(
            line,
            tok.col,
            format!("expected a finite number, found {:?}", tok.text),
        )),
    }
}

fn expect_fields(toks: &[Token], n: usize, line: usize, usage: &str) -> Result<(), ParseError> {
    if toks.len() == n {
        return Ok(());
    }
    let col = toks.get(n).or(toks.last()).map_or(1, |t| t.col);
    Err(ParseError::syntax(line, col, format!("expected `{usage}`")))
}

struct Amplitude {
    index: usize,
    value: C64,
    line: usize,
    col: usize,
}

struct ComponentLine {
    component: PathComponent,
    line: usize,
    col: usize,
}

/// Parses `.wvx` text.
pub fn parse_experiment(text: &str) -> Result<ExperimentSpec, ParseError> {
    let mut dim: Option<(usize, usize)> = None;
    let mut name: Option<(String, usize)> = None;
    let mut pre = Vec::new();
    let mut post = Vec::new();
    let mut comps = Vec::new();

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let head = tokenize(raw);
        let Some(first) = head.first() else { continue };
        if first.text.starts_with('#') {
            continue;
        }
        if first.text == "name" {
            let value = raw[raw.find("name").unwrap() + 4..].trim();
            if value.is_empty() {
                return Err(ParseError::syntax(line_no, first.col, "expected `name <text>`"));
            }
            if name.is_some() {
                return Err(ParseError {
                    line: line_no,
                    col: first.col,
                    kind: ParseErrorKind::DuplicateDirective("name".into()),
                });
            }
            name = Some((value.to_string(), line_no));
            continue;
        }
        let body = raw.find('#').map_or(raw, |p| &raw[..p]);
        let toks = tokenize(body);
        let directive = &toks[0];
        match directive.text {
            "dim" => {
                expect_fields(&toks, 2, line_no, "dim <positive-int>")?;
                if dim.is_some() {
                    return Err(ParseError {
                        line: line_no,
                        col: directive.col,
                        kind: ParseErrorKind::DuplicateDirective("dim".into()),
                    });
                }
                let n = parse_index(&toks[1], line_no)?;
                if n == 0 {
                    return Err(ParseError::syntax(line_no, toks[1].col, "dim must be positive"));
                }
                dim = Some((n, line_no));
            }
            "pre" | "post" => {
                expect_fields(&toks, 4, line_no, &format!("{} <index> <re> <im>", directive.text))?;
                let amp = Amplitude {
                    index: parse_index(&toks[1], line_no)?,
                    value: C64::new(parse_real(&toks[2], line_no)?, parse_real(&toks[3], line_no)?),
                    line: line_no,
                    col: toks[1].col,
                };
                if directive.text == "pre" {
                    pre.push(amp);
                } else {
                    post.push(amp);
                }
            }
            "component" => {
                if toks.len() < 3 {
                    return Err(ParseError::syntax(
                        line_no,
                        toks.last().unwrap().col,
                        "expected `component <index> <phase|atten|cnum> ...`",
                    ));
                }
                let index = parse_index(&toks[1], line_no)?;
                let kind = &toks[2];
                let built = match kind.text {
                    "phase" => {
                        expect_fields(&toks, 4, line_no, "component <index> phase <theta>")?;
                        PathComponent::phase(index, parse_real(&toks[3], line_no)?)
                    }
                    "atten" => {
                        expect_fields(&toks, 4, line_no, "component <index> atten <alpha>")?;
                        PathComponent::attenuator(index, parse_real(&toks[3], line_no)?)
                    }
                    "cnum" => {
                        expect_fields(&toks, 5, line_no, "component <index> cnum <re> <im>")?;
                        PathComponent::general(
                            index,
                            C64::new(parse_real(&toks[3], line_no)?, parse_real(&toks[4], line_no)?),
                        )
                    }
                    other => {
                        return Err(ParseError::syntax(
                            line_no,
                            kind.col,
                            format!("unknown component kind {other:?}"),
                        ))
                    }
                };
                let component = built
                    .map_err(|e| ParseError::syntax(line_no, toks[3].col, e.to_string()))?;
                comps.push(ComponentLine {
                    component,
                    line: line_no,
                    col: toks[1].col,
                });
            }
            other => {
                return Err(ParseError::syntax(
                    line_no,
                    directive.col,
                    format!("unknown directive {other:?}"),
                ))
            }
        }
    }

    let Some((dim, dim_line)) = dim else {
        return Err(ParseError::syntax(1, 1, "missing dim"));
    };

    let pre = build_state(&pre, dim, dim_line, "pre")?;
    let post = build_state(&post, dim, dim_line, "post")?;

    let mut seen = BTreeSet::new();
    let mut components = ComponentSet::new();
    for c in &comps {
        let p = &c.component;
        if p.path_index >= dim {
            return Err(ParseError {
                line: c.line,
                col: c.col,
                kind: ParseErrorKind::IndexOutOfRange {
                    index: p.path_index,
                    dim,
                },
            });
        }
        if !seen.insert((p.path_index, p.kind)) {
            return Err(ParseError {
                line: c.line,
                col: c.col,
                kind: ParseErrorKind::DuplicateDirective(format!(
                    "component {} {}",
                    p.path_index,
                    p.kind.as_str()
                )),
            });
        }
        components
            .insert(*p)
            .map_err(|e| ParseError::syntax(c.line, c.col, e.to_string()))?;
    }

    Ok(ExperimentSpec {
        dim,
        name: name.map(|(n, _)| n),
        pre,
        post,
        components,
    })
}

fn build_state(
    entries: &[Amplitude],
    dim: usize,
    dim_line: usize,
    which: &'static str,
) -> Result<StateVector, ParseError> {
    let mut dense: BTreeMap<usize, C64> = BTreeMap::new();
    for e in entries {
        if e.index >= dim {
            return Err(ParseError {
                line: e.line,
                col: e.col,
                kind: ParseErrorKind::IndexOutOfRange { index: e.index, dim },
            });
        }
        if dense.insert(e.index, e.value).is_some() {
            return Err(ParseError {
                line: e.line,
                col: e.col,
                kind: ParseErrorKind::DuplicateDirective(format!("{which} {}", e.index)),
            });
        }
    }
    let amps = (0..dim)
        .map(|k| dense.get(&k).copied().unwrap_or_default())
        .collect();
    StateVector::new(amps).map_err(|_| {
        let (line, col) = entries.first().map_or((dim_line, 1), |e| (e.line, 1));
        ParseError {
            line,
            col,
            kind: ParseErrorKind::ZeroState(which),
        }
    })
}

/// Canonical text: dim, name, pre and post ascending, components by path.
/// Exact-zero amplitudes are omitted.
pub fn serialize_experiment(spec: &ExperimentSpec) -> String {
    spec.to_string()
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        if let Some(name) = &self.name {
            writeln!(f, "name {name}")?;
        }
        for (label, state) in [("pre", &self.pre), ("post", &self.post)] {
            for (k, a) in state.amplitudes().iter().enumerate() {
                if a.re != 0.0 || a.im != 0.0 {
                    writeln!(f, "{label} {k} {} {}", a.re, a.im)?;
                }
            }
        }
        for c in self.components.iter() {
            match c.kind {
                ComponentKind::Phase => writeln!(f, "component {} phase {}", c.path_index, c.theta)?,
                ComponentKind::Attenuator => {
                    writeln!(f, "component {} atten {}", c.path_index, c.alpha)?
                }
                ComponentKind::General => {
                    writeln!(f, "component {} cnum {} {}", c.path_index, c.c.re, c.c.im)?
                }
            }
        }
        Ok(())
    }
}
