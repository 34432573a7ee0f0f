//! Piecewise functions of one real variable.
//!
//! Pieces are half-open `[lo, hi)` and evaluation at an interior breakpoint
//! uses the right-hand piece; the final piece is closed at its upper bound.
//! Bodies are either parsed expressions or references to other piecewise
//! functions, so that shifted and summed reuse evaluates the referenced
//! function with the same floating-point operations every time.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{DomainError, ExprNode};
use crate::grid::{linspace, Interval};

/// `x ↦ base(x + arg_shift) + value_offset`.
#[derive(Debug, Clone)]
pub struct CompositeRef {
    pub base: Arc<PiecewiseFn>,
    pub arg_shift: f64,
    pub value_offset: f64,
}

impl CompositeRef {
    pub fn eval(&self, x: f64) -> std::result::Result<f64, DomainError> {
        Ok(self.base.evaluate(x + self.arg_shift)? + self.value_offset)
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Expr(Arc<ExprNode>),
    Shift(CompositeRef),
    /// Pointwise sum `first(x) + second(x)`.
    Sum(Arc<PiecewiseFn>, Arc<PiecewiseFn>),
}

impl Body {
    pub fn eval(&self, x: f64) -> std::result::Result<f64, DomainError> {
        match self {
            Body::Expr(node) => node.eval(x),
            Body::Shift(composite) => composite.eval(x),
            Body::Sum(first, second) => Ok(first.evaluate(x)? + second.evaluate(x)?),
        }
    }

    fn descriptor(&self) -> BodyDescriptor {
        match self {
            Body::Expr(node) => BodyDescriptor::Expr {
                text: node.to_string(),
            },
            Body::Shift(c) => BodyDescriptor::Shift {
                base: c.base.name().to_string(),
                arg_shift: c.arg_shift,
                value_offset: c.value_offset,
            },
            Body::Sum(a, b) => BodyDescriptor::Sum {
                terms: vec![a.name().to_string(), b.name().to_string()],
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub body: Body,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, body: Body) -> Self {
        Piece { lo, hi, body }
    }

    pub fn expr(lo: f64, hi: f64, node: ExprNode) -> Self {
        Piece::new(lo, hi, Body::Expr(Arc::new(node)))
    }
}

#[derive(Debug, Clone)]
pub struct PiecewiseFn {
    name: String,
    pieces: Vec<Piece>,
}

impl PiecewiseFn {
    /// Build from pieces that tile `[pieces[0].lo, pieces[last].hi]`.
    pub fn new(name: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        let name = name.into();
        if pieces.is_empty() {
            return Err(Error::InvalidFunction(format!("`{name}` has no pieces")));
        }
        for (i, piece) in pieces.iter().enumerate() {
            if piece.lo.is_nan() || piece.hi.is_nan() || !(piece.lo < piece.hi) {
                return Err(Error::InvalidFunction(format!(
                    "`{name}` piece {i} has empty or invalid interval [{}, {})",
                    piece.lo, piece.hi
                )));
            }
            if piece.lo == f64::INFINITY || piece.hi == f64::NEG_INFINITY {
                return Err(Error::InvalidFunction(format!("`{name}` piece {i} lies at infinity")));
            }
        }
        for (i, pair) in pieces.windows(2).enumerate() {
            if pair[0].hi != pair[1].lo {
                return Err(Error::InvalidFunction(format!(
                    "`{name}` pieces {i} and {} do not meet: {} vs {}",
                    i + 1,
                    pair[0].hi,
                    pair[1].lo
                )));
            }
        }
        Ok(PiecewiseFn { name, pieces })
    }

    /// A single expression on `domain`.
    pub fn from_expr(name: impl Into<String>, node: ExprNode, domain: Interval) -> Result<Self> {
        Self::new(name, vec![Piece::expr(domain.lo, domain.hi, node)])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let domain = self.domain();
        if !(x >= domain.lo && x <= domain.hi) {
            return None;
        }
        // Last piece whose lower bound is <= x; ties at a breakpoint resolve
        // to the right-hand piece.
        let idx = self.pieces.partition_point(|p| p.lo <= x);
        Some(idx.saturating_sub(1))
    }

    /// Value of the piece containing `x`.
    pub fn evaluate(&self, x: f64) -> std::result::Result<f64, DomainError> {
        if !x.is_finite() {
            return Err(DomainError::new(x, format!("`{}` evaluated at a non-finite point", self.name)));
        }
        match self.piece_index(x) {
            Some(i) => self.pieces[i].body.eval(x),
            None => Err(DomainError::new(
                x,
                format!("outside the domain {} of `{}`", self.domain(), self.name),
            )),
        }
    }

    /// `n` uniformly spaced `(x, f(x))` pairs over `window`, endpoints included.
    pub fn sample(&self, window: Interval, n: usize) -> Result<Vec<(f64, f64)>> {
        if n < 2 {
            return Err(Error::InvalidRequest("sample needs n >= 2".into()));
        }
        if !self.domain().contains_interval(window) {
            return Err(Error::Domain(DomainError::new(
                if window.lo < self.domain().lo { window.lo } else { window.hi },
                format!("window {window} is outside the domain {} of `{}`", self.domain(), self.name),
            )));
        }
        linspace(window, n)
            .into_iter()
            .map(|x| Ok((x, self.evaluate(x)?)))
            .collect()
    }

    /// Largest `|left limit - right value|` over interior breakpoints,
    /// where the left limit is the left piece's body evaluated at the
    /// breakpoint. Breakpoints where either side cannot be evaluated
    /// report an error.
    pub fn max_breakpoint_jump(&self) -> Result<Option<(f64, f64)>> {
        let mut worst: Option<(f64, f64)> = None;
        for pair in self.pieces.windows(2) {
            let at = pair[0].hi;
            if !at.is_finite() {
                continue;
            }
            let left = pair[0].body.eval(at)?;
            let right = pair[1].body.eval(at)?;
            let jump = (left - right).abs();
            if worst.is_none_or(|(_, w)| jump > w) {
                worst = Some((at, jump));
            }
        }
        Ok(worst)
    }

    pub fn check_continuity(&self, tau_cont: f64) -> Result<()> {
        if let Some((at, jump)) = self.max_breakpoint_jump()? {
            if jump > tau_cont {
                return Err(Error::Discontinuous {
                    name: self.name.clone(),
                    at,
                    jump,
                });
            }
        }
        Ok(())
    }

    /// Serializable piece table.
    pub fn table(&self) -> FunctionTable {
        FunctionTable {
            name: self.name.clone(),
            domain: self.domain(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceDescriptor {
                    lo: p.lo,
                    hi: p.hi,
                    body: p.body.descriptor(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for PiecewiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.table()).map_err(|_| fmt::Error)?)
    }
}

/// Wrap `base` as the single-piece function `x ↦ base(x + arg_shift) + value_offset`
/// on the shifted domain of `base`.
pub fn compose_shift(base: Arc<PiecewiseFn>, arg_shift: f64, value_offset: f64) -> PiecewiseFn {
    let domain = base.domain();
    compose_shift_on(base, arg_shift, value_offset, Interval::new(domain.lo - arg_shift, domain.hi - arg_shift))
}

/// As [`compose_shift`] but on an explicit interval.
pub fn compose_shift_on(
    base: Arc<PiecewiseFn>,
    arg_shift: f64,
    value_offset: f64,
    on: Interval,
) -> PiecewiseFn {
    let name = format!("{}@shift", base.name());
    PiecewiseFn {
        name,
        pieces: vec![Piece::new(
            on.lo,
            on.hi,
            Body::Shift(CompositeRef {
                base,
                arg_shift,
                value_offset,
            }),
        )],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyDescriptor {
    Expr { text: String },
    Shift { base: String, arg_shift: f64, value_offset: f64 },
    Sum { terms: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PieceDescriptor {
    #[serde(with = "crate::grid::extended_f64")]
    pub lo: f64,
    #[serde(with = "crate::grid::extended_f64")]
    pub hi: f64,
    pub body: BodyDescriptor,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FunctionTable {
    pub name: String,
    pub domain: Interval,
    pub pieces: Vec<PieceDescriptor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Claim {
    ClassK,
    ClassKe,
    Convex,
    Concave,
}

impl Claim {
    pub fn from_tag(tag: &str) -> Option<Claim> {
        match tag {
            "ClassK" => Some(Claim::ClassK),
            "ClassKe" => Some(Claim::ClassKe),
            "Convex" => Some(Claim::Convex),
            "Concave" => Some(Claim::Concave),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Claim::ClassK => "ClassK",
            Claim::ClassKe => "ClassKe",
            Claim::Convex => "Convex",
            Claim::Concave => "Concave",
        }
    }
}

/// A named function together with the (untrusted) classes the user claims for it.
#[derive(Debug, Clone)]
pub struct FunctionSpec {
    pub name: String,
    pub function: Arc<PiecewiseFn>,
    pub claims: BTreeSet<Claim>,
}

impl FunctionSpec {
    pub fn new(function: PiecewiseFn, claims: impl IntoIterator<Item = Claim>) -> Self {
        FunctionSpec {
            name: function.name().to_string(),
            function: Arc::new(function),
            claims: claims.into_iter().collect(),
        }
    }

    /// Parse a single expression on the whole real line.
    pub fn parse(name: &str, text: &str, claims: impl IntoIterator<Item = Claim>) -> Result<Self> {
        let node = crate::expr::parse_expr(text)?;
        Ok(Self::new(PiecewiseFn::from_expr(name, node, Interval::REAL)?, claims))
    }
}
