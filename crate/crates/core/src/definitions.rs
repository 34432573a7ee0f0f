//! Function definition files.
//!
//! ```text
//! # comments run to end of line
//! function sq: x^2
//! claims: ClassK, Convex
//!
//! function root on [0, inf): sqrt(x)
//! claims: ClassK, Concave
//!
//! function ke_root: piecewise
//!   on [-inf, 0): -sqrt(-x)
//!   on [0, inf): x
//! claims: ClassKe
//! ```
//!
//! A function without `on` is defined on the whole real line. Bracket
//! shapes in intervals are accepted either way; evaluation always uses the
//! half-open piece convention. Continuity across pieces is checked on load.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::parse_expr;
use crate::funcmodel::{Claim, FunctionSpec, Piece, PiecewiseFn};
use crate::grid::Interval;

#[derive(Debug, Clone, Default)]
pub struct Definitions {
    specs: Vec<FunctionSpec>,
}

impl Definitions {
    pub fn specs(&self) -> &[FunctionSpec] {
        &self.specs
    }

    pub fn get(&self, name: &str) -> Option<&FunctionSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

struct Pending {
    line: usize,
    name: String,
    domain: Option<Interval>,
    single: Option<String>,
    pieces: Vec<(usize, Interval, String)>,
    claims: Option<BTreeSet<Claim>>,
}

fn def_err(line: usize, message: impl Into<String>) -> Error {
    Error::Definition {
        line,
        message: message.into(),
    }
}

fn parse_bound(text: &str, line: usize) -> Result<f64> {
    match text.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse::<f64>().map_err(|_| def_err(line, format!("bad interval bound `{t}`"))),
    }
}

/// Parses a leading `[lo, hi)` (any bracket shapes); returns the
/// interval and the remaining text.
fn parse_interval(text: &str, line: usize) -> Result<(Interval, &str)> {
    let text = text.trim_start();
    if !(text.starts_with('[') || text.starts_with('(')) {
        return Err(def_err(line, "expected an interval like [lo, hi)"));
    }
    let close = text
        .find([']', ')'])
        .ok_or_else(|| def_err(line, "unterminated interval"))?;
    let inner = &text[1..close];
    let (lo, hi) = inner
        .split_once(',')
        .ok_or_else(|| def_err(line, "interval needs two comma-separated bounds"))?;
    let interval = Interval::new(parse_bound(lo, line)?, parse_bound(hi, line)?);
    if !(interval.lo < interval.hi) {
        return Err(def_err(line, format!("empty interval {interval}")));
    }
    Ok((interval, &text[close + 1..]))
}

fn parse_claims(text: &str, line: usize) -> Result<BTreeSet<Claim>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tag| Claim::from_tag(tag).ok_or_else(|| def_err(line, format!("unknown claim `{tag}`"))))
        .collect()
}

fn expr_at(text: &str, line: usize) -> Result<crate::expr::ExprNode> {
    parse_expr(text.trim()).map_err(|e| def_err(line, format!("in `{}`: {e}", text.trim())))
}

impl Pending {
    fn finish(self, tau_cont: f64) -> Result<FunctionSpec> {
        let f = if let Some(text) = self.single {
            let domain = self.domain.unwrap_or(Interval::REAL);
            PiecewiseFn::from_expr(&self.name, expr_at(&text, self.line)?, domain)
                .map_err(|e| def_err(self.line, e.to_string()))?
        } else {
            if self.pieces.is_empty() {
                return Err(def_err(self.line, format!("piecewise function `{}` has no `on` lines", self.name)));
            }
            let mut pieces = Vec::with_capacity(self.pieces.len());
            for (line, interval, text) in &self.pieces {
                pieces.push(Piece::expr(interval.lo, interval.hi, expr_at(text, *line)?));
            }
            PiecewiseFn::new(&self.name, pieces).map_err(|e| def_err(self.line, e.to_string()))?
        };
        f.check_continuity(tau_cont)
            .map_err(|e| def_err(self.line, e.to_string()))?;
        Ok(FunctionSpec::new(f, self.claims.unwrap_or_default()))
    }
}

/// Parse a definition document. `tau_cont` bounds the jump allowed at
/// breakpoints between user pieces.
pub fn parse_definitions(text: &str, tau_cont: f64) -> Result<Definitions> {
    let mut defs = Definitions::default();
    let mut pending: Option<Pending> = None;

    let flush = |pending: &mut Option<Pending>, defs: &mut Definitions| -> Result<()> {
        if let Some(p) = pending.take() {
            let line = p.line;
            let spec = p.finish(tau_cont)?;
            if defs.get(&spec.name).is_some() {
                return Err(def_err(line, format!("duplicate function `{}`", spec.name)));
            }
            defs.specs.push(spec);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !content.is_ascii() {
            return Err(def_err(line, "non-ASCII input"));
        }
        if let Some(rest) = content.strip_prefix("function ") {
            flush(&mut pending, &mut defs)?;
            let rest = rest.trim_start();
            let name_end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            let name = &rest[..name_end];
            if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
                return Err(def_err(line, "expected a function name"));
            }
            let mut rest = rest[name_end..].trim_start();
            let mut domain = None;
            if let Some(after) = rest.strip_prefix("on") {
                let (interval, tail) = parse_interval(after, line)?;
                domain = Some(interval);
                rest = tail.trim_start();
            }
            let body = rest
                .strip_prefix(':')
                .ok_or_else(|| def_err(line, "expected `:` after the function header"))?
                .trim();
            let (single, is_piecewise) = if body == "piecewise" {
                (None, true)
            } else if body.is_empty() {
                return Err(def_err(line, "missing expression"));
            } else {
                (Some(body.to_string()), false)
            };
            if is_piecewise && domain.is_some() {
                return Err(def_err(line, "a piecewise function takes its domain from its pieces"));
            }
            pending = Some(Pending {
                line,
                name: name.to_string(),
                domain,
                single,
                pieces: Vec::new(),
                claims: None,
            });
        } else if let Some(rest) = content.strip_prefix("on") {
            let p = pending
                .as_mut()
                .filter(|p| p.single.is_none() && p.claims.is_none())
                .ok_or_else(|| def_err(line, "`on` line outside a piecewise block"))?;
            let (interval, tail) = parse_interval(rest, line)?;
            let expr = tail
                .trim_start()
                .strip_prefix(':')
                .ok_or_else(|| def_err(line, "expected `:` after the piece interval"))?;
            p.pieces.push((line, interval, expr.to_string()));
        } else if let Some(rest) = content.strip_prefix("claims:") {
            let p = pending
                .as_mut()
                .ok_or_else(|| def_err(line, "`claims:` before any function"))?;
            if p.claims.is_some() {
                return Err(def_err(line, "repeated `claims:` line"));
            }
            p.claims = Some(parse_claims(rest, line)?);
        } else {
            return Err(def_err(line, format!("unrecognized line `{content}`")));
        }
    }
    flush(&mut pending, &mut defs)?;
    Ok(defs)
}

pub fn load_definitions(path: &Path, tau_cont: f64) -> std::result::Result<Definitions, LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    parse_definitions(&text, tau_cont).map_err(LoadError::Parse)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("I/O error: {0}")]
    Io(std::io::Error),
    #[error(transparent)]
    Parse(Error),
}
