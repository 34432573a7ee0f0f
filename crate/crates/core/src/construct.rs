//! Construction of the bounding function β.
//!
//! Convex case: α₂ is continued to the left by a line, kept as is on
//! `[0, A)`, and continued past `A` by `α₂(A) + α′₁(x − A)` where α′₁ is a
//! convex class K majorant of α₁ on `x ≥ 0`. Then
//! `β(u) = α′₂(u)` for `u < 0` and `β(u) = α′₂(u + A) − α′₂(A)` for `u ≥ 0`.
//!
//! Concave case: α₂ is continued to the left by a line and kept on `x ≥ 0`;
//! `β(u) = α′₂(u)` for `u < 0` and `β(u) = α₁(u) + α′₂(u)` for `u ≥ 0`.
//!
//! All reuse goes through [`Body::Shift`] / [`Body::Sum`], so the
//! construction identities hold with identical floating-point operations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::Tolerances;
use crate::error::{Error, Result};
use crate::expr::{DomainError, ExprNode};
use crate::funcmodel::{compose_shift_on, Body, CompositeRef, FunctionTable, Piece, PiecewiseFn};
use crate::grid::{linspace, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LemmaCase {
    ConvexCase,
    ConcaveCase,
}

impl LemmaCase {
    pub fn label(self) -> &'static str {
        match self {
            LemmaCase::ConvexCase => "convex",
            LemmaCase::ConcaveCase => "concave",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub lemma: LemmaCase,
    /// The bound `A`; `inf` is allowed in the concave case only.
    #[serde(rename = "A", with = "crate::grid::extended_f64")]
    pub bound: f64,
    pub window: Interval,
    pub slope_floor: f64,
    pub slope_cap: f64,
    pub majorant_margin: f64,
    /// Smallest abscissa for the majorant ratio scan; `window.hi * 1e-9` when unset.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_floor: Option<f64>,
    pub grid: usize,
    pub levels: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl LemmaConfig {
    pub fn new(lemma: LemmaCase, bound: f64, window: Interval) -> Self {
        LemmaConfig {
            lemma,
            bound,
            window,
            slope_floor: 1e-6,
            slope_cap: 1e6,
            majorant_margin: 0.01,
            x_floor: None,
            grid: 256,
            levels: 3,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn x_floor(&self) -> f64 {
        self.x_floor.unwrap_or(self.window.hi * 1e-9)
    }

    /// `A` itself when finite, otherwise the largest bound the window can host.
    pub fn effective_bound(&self) -> f64 {
        if self.bound.is_finite() {
            self.bound
        } else {
            self.window.hi.min(-self.window.lo)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRequest(msg));
        if !(self.bound > 0.0) {
            return bad(format!("A must be positive, got {}", self.bound));
        }
        if self.lemma == LemmaCase::ConvexCase && !self.bound.is_finite() {
            return bad("the convex case needs a finite A".into());
        }
        if !self.window.is_bounded() || !(self.window.lo < 0.0 && self.window.hi > 0.0) {
            return bad(format!("window {} must be bounded and contain 0 in its interior", self.window));
        }
        let a = self.effective_bound();
        if !(self.window.lo <= -a && self.window.hi >= a) {
            return bad(format!("window {} must contain [-A, A] = [{}, {a}]", self.window, -a));
        }
        if self.grid < 3 {
            return bad(format!("grid size must be at least 3, got {}", self.grid));
        }
        if !(self.slope_floor > 0.0 && self.slope_cap >= self.slope_floor) {
            return bad("need 0 < slope_floor <= slope_cap".into());
        }
        if !(self.majorant_margin >= 0.0) {
            return bad("majorant margin must be non-negative".into());
        }
        if !(self.x_floor() > 0.0 && self.x_floor() < self.window.hi) {
            return bad(format!("x_floor {} must lie in (0, window.hi)", self.x_floor()));
        }
        self.tolerances.validate()
    }
}

/// The linear majorant `x ↦ L·x` on `[0, ∞)`.
#[derive(Debug, Clone)]
pub struct LinearMajorant {
    pub function: PiecewiseFn,
    pub slope: f64,
    /// Largest `α₁(x) − L·x` over the grid, floored at 0.
    pub slack: f64,
}

/// Linear continuation `x ↦ s·x` on `(−∞, 0)`.
#[derive(Debug, Clone)]
pub struct LeftExtension {
    pub piece: Piece,
    pub slope: f64,
    pub junction_slack: f64,
    pub notes: Vec<String>,
}

fn eval(f: &PiecewiseFn, x: f64) -> Result<f64> {
    Ok(f.evaluate(x)?)
}

fn require_domain(f: &PiecewiseFn, needed: Interval) -> Result<()> {
    if f.domain().contains_interval(needed) {
        Ok(())
    } else {
        let x = if needed.lo < f.domain().lo { needed.lo } else { needed.hi };
        Err(Error::Domain(DomainError::new(
            x,
            format!("`{}` must be defined on {needed}, domain is {}", f.name(), f.domain()),
        )))
    }
}

// Relative growth below this is treated as rounding, not divergence.
const GROWTH_EPS: f64 = 1e-6;

/// `x ↦ L·x` with `L = (1 + μ)·max α₁(x)/x` over a grid of `[x_floor, window.hi]`.
///
/// Fails with [`Error::MajorantUnavailable`] when the ratio peaks at the
/// first grid point and keeps growing under two further 10× reductions of
/// the floor, i.e. α₁ has unbounded slope at the origin.
pub fn build_convex_majorant(alpha1: &PiecewiseFn, window: Interval, cfg: &LemmaConfig) -> Result<LinearMajorant> {
    require_domain(alpha1, Interval::new(0.0, window.hi))?;
    let floor = cfg.x_floor();
    let ratio = |x: f64| -> Result<f64> { Ok(eval(alpha1, x)? / x) };

    let xs = linspace(Interval::new(floor, window.hi), cfg.grid);
    let mut best = f64::NEG_INFINITY;
    let mut at = 0usize;
    for (i, &x) in xs.iter().enumerate() {
        let r = ratio(x)?;
        if r > best {
            best = r;
            at = i;
        }
    }
    if at == 0 {
        let x1 = floor / 10.0;
        let x2 = floor / 100.0;
        let r1 = ratio(x1)?;
        let r2 = ratio(x2)?;
        if r1 > best * (1.0 + GROWTH_EPS) && r2 > r1 * (1.0 + GROWTH_EPS) {
            return Err(Error::MajorantUnavailable {
                points: vec![floor, x1, x2],
                ratios: vec![best, r1, r2],
            });
        }
        best = best.max(r1).max(r2);
    }
    let mut slope = (1.0 + cfg.majorant_margin) * best;
    if !(slope > 0.0) {
        slope = cfg.slope_floor;
    }
    let function = PiecewiseFn::new(
        "alpha1_majorant_seed",
        vec![Piece::expr(0.0, f64::INFINITY, ExprNode::linear(slope))],
    )?;
    let mut slack = 0.0f64;
    for x in linspace(Interval::new(0.0, window.hi), cfg.grid) {
        slack = slack.max(eval(alpha1, x)? - eval(&function, x)?);
    }
    Ok(LinearMajorant { function, slope, slack })
}

fn forward_slope(alpha2: &PiecewiseFn, h: f64) -> Result<f64> {
    Ok((eval(alpha2, h)? - eval(alpha2, 0.0)?) / h)
}

fn left_piece(slope: f64) -> Piece {
    Piece::expr(f64::NEG_INFINITY, 0.0, ExprNode::linear(slope))
}

/// Convex continuation for `x < 0`: slope `max(s_min, (α₂(h) − α₂(0))/h)`
/// with `h = A·1e−6`.
///
/// The slack is `max(0, s·x − α₂(x))` over a grid of `[0, min(s, A)]`;
/// it is positive when α₂ is flatter than the chosen slope at the origin.
pub fn build_convex_left_extension(alpha2: &PiecewiseFn, cfg: &LemmaConfig) -> Result<LeftExtension> {
    let a = cfg.effective_bound();
    require_domain(alpha2, Interval::new(0.0, a))?;
    let estimate = forward_slope(alpha2, a * 1e-6)?;
    let slope = cfg.slope_floor.max(estimate);
    let mut notes = Vec::new();
    if slope > estimate {
        notes.push(format!(
            "left slope raised from the forward difference {estimate:e} to the floor {slope:e}"
        ));
    }
    let mut slack = 0.0f64;
    for x in linspace(Interval::new(0.0, slope.min(a)), cfg.grid) {
        slack = slack.max(slope * x - eval(alpha2, x)?);
    }
    Ok(LeftExtension {
        piece: left_piece(slope),
        slope,
        junction_slack: slack,
        notes,
    })
}

/// Concave continuation for `x < 0`: slope `min(s_max, α₂′(0⁺))`.
///
/// The derivative at `0⁺` is estimated by forward differences at
/// `h = window.hi·1e−6·10⁻ᵏ`, `k = 0..12`. If the estimates settle, the
/// last one is used; if they keep growing, the slope is clamped to `s_max`.
/// The slack is the largest midpoint violation `(α₂(t) − s·t)/2` of the
/// pair `(−t, t)` over a grid of `[0, window.hi]` and the probe points.
pub fn build_concave_left_extension(alpha2: &PiecewiseFn, cfg: &LemmaConfig) -> Result<LeftExtension> {
    let hi = cfg.window.hi;
    require_domain(alpha2, Interval::new(0.0, hi))?;
    let probes: Vec<f64> = (0..=12).map(|k| hi * 1e-6 * 10f64.powi(-k)).collect();
    let slopes: Vec<f64> = probes.iter().map(|&h| forward_slope(alpha2, h)).collect::<Result<_>>()?;

    let settled = slopes
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() <= 1e-3 * w[0].abs());
    let mut notes = Vec::new();
    let slope = match settled {
        Some(k) if slopes[k + 1] <= cfg.slope_cap => slopes[k + 1].max(cfg.slope_floor),
        Some(k) => {
            notes.push(format!(
                "slope estimate {:e} at 0+ exceeds the cap; clamped to {:e}",
                slopes[k + 1],
                cfg.slope_cap
            ));
            cfg.slope_cap
        }
        None => {
            notes.push(format!(
                "forward differences at 0+ keep growing (last {:e} at h = {:e}); slope clamped to {:e}",
                slopes[slopes.len() - 1],
                probes[probes.len() - 1],
                cfg.slope_cap
            ));
            cfg.slope_cap
        }
    };

    let mut slack = 0.0f64;
    for t in linspace(Interval::new(0.0, hi), cfg.grid).into_iter().chain(probes) {
        slack = slack.max((eval(alpha2, t)? - slope * t) / 2.0);
    }
    if slack > 0.0 {
        notes.push(format!(
            "the linear continuation breaks concavity at the origin by up to {slack:e}"
        ));
    }
    Ok(LeftExtension {
        piece: left_piece(slope),
        slope,
        junction_slack: slack,
        notes,
    })
}

/// Pieces of `f` restricted to `[lo, hi)`, sharing their bodies with `f`.
fn clip_pieces(f: &PiecewiseFn, lo: f64, hi: f64) -> Vec<Piece> {
    f.pieces()
        .iter()
        .filter(|p| p.hi > lo && p.lo < hi)
        .map(|p| Piece::new(p.lo.max(lo), p.hi.min(hi), p.body.clone()))
        .collect()
}

/// Three-piece α′₂: the left line on `(−∞, 0)`, α₂'s own pieces on `[0, A)`
/// and `α₂(A) + α′₁(x − A)` on `[A, ∞)`.
pub fn build_alpha2_ext_convex(
    alpha2: &PiecewiseFn,
    alpha1_majorant: Arc<PiecewiseFn>,
    left: &LeftExtension,
    bound: f64,
    tol: &Tolerances,
) -> Result<PiecewiseFn> {
    require_domain(alpha2, Interval::new(0.0, bound))?;
    require_domain(&alpha1_majorant, Interval::new(0.0, f64::INFINITY))?;
    let at_bound = eval(alpha2, bound)?;
    let mut pieces = vec![left.piece.clone()];
    pieces.extend(clip_pieces(alpha2, 0.0, bound));
    pieces.push(Piece::new(
        bound,
        f64::INFINITY,
        Body::Shift(CompositeRef {
            base: alpha1_majorant,
            arg_shift: -bound,
            value_offset: at_bound,
        }),
    ));
    let ext = PiecewiseFn::new("alpha2_ext", pieces)?;
    ext.check_continuity(tol.cont)?;
    Ok(ext)
}

/// Two-piece α′₂ for the concave case: the left line and α₂ on `[0, ∞)`.
pub fn build_alpha2_ext_concave(alpha2: &PiecewiseFn, left: &LeftExtension, tol: &Tolerances) -> Result<PiecewiseFn> {
    require_domain(alpha2, Interval::new(0.0, alpha2.domain().hi))?;
    let mut pieces = vec![left.piece.clone()];
    pieces.extend(clip_pieces(alpha2, 0.0, f64::INFINITY));
    let ext = PiecewiseFn::new("alpha2_ext", pieces)?;
    ext.check_continuity(tol.cont)?;
    Ok(ext)
}

/// `β(u) = α′₂(u)` on `(−∞, 0)` and `α′₂(u + A) − α′₂(A)` on `[0, ∞)`,
/// with `α′₂(A)` evaluated once. Returns β and that offset.
pub fn build_beta_convex(alpha2_ext: Arc<PiecewiseFn>, bound: f64) -> Result<(PiecewiseFn, f64)> {
    let at_bound = eval(&alpha2_ext, bound)?;
    let beta = PiecewiseFn::new(
        "beta",
        vec![
            Piece::new(
                f64::NEG_INFINITY,
                0.0,
                Body::Shift(CompositeRef {
                    base: alpha2_ext.clone(),
                    arg_shift: 0.0,
                    value_offset: 0.0,
                }),
            ),
            Piece::new(
                0.0,
                f64::INFINITY,
                Body::Shift(CompositeRef {
                    base: alpha2_ext,
                    arg_shift: bound,
                    value_offset: -at_bound,
                }),
            ),
        ],
    )?;
    Ok((beta, at_bound))
}

/// `β(u) = α′₂(u)` on `(−∞, 0)` and `α₁(u) + α′₂(u)` on `[0, ∞)`.
/// Does not depend on `A`.
pub fn build_beta_concave(alpha1: Arc<PiecewiseFn>, alpha2_ext: Arc<PiecewiseFn>) -> Result<PiecewiseFn> {
    let hi = alpha1.domain().hi.min(alpha2_ext.domain().hi);
    PiecewiseFn::new(
        "beta",
        vec![
            Piece::new(
                f64::NEG_INFINITY,
                0.0,
                Body::Shift(CompositeRef {
                    base: alpha2_ext.clone(),
                    arg_shift: 0.0,
                    value_offset: 0.0,
                }),
            ),
            Piece::new(0.0, hi, Body::Sum(alpha1, alpha2_ext)),
        ],
    )
}

#[derive(Debug, Clone)]
pub struct ConstructionArtifacts {
    pub lemma: LemmaCase,
    /// α′₁ viewed through α′₂: `x ↦ α′₂(x + A) − α₂(A)` on `[0, ∞)`.
    pub alpha1_majorant: Option<Arc<PiecewiseFn>>,
    /// The majorant used to build the `[A, ∞)` piece of α′₂.
    pub majorant_seed: Option<Arc<PiecewiseFn>>,
    pub majorant_slope: Option<f64>,
    pub alpha2_ext: Arc<PiecewiseFn>,
    pub beta: Arc<PiecewiseFn>,
    pub left_slope: f64,
    pub junction_slack: f64,
    pub majorant_slack: f64,
    /// `α′₂(A)`, the value offset of β's right branch in the convex case.
    pub beta_offset: Option<f64>,
    pub beta_min_increment: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactsReport {
    pub lemma: LemmaCase,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha1_majorant: Option<FunctionTable>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub majorant_seed: Option<FunctionTable>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub majorant_slope: Option<f64>,
    pub alpha2_ext: FunctionTable,
    pub beta: FunctionTable,
    pub left_slope: f64,
    pub junction_slack: f64,
    pub majorant_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta_offset: Option<f64>,
    pub beta_min_increment: f64,
    pub notes: Vec<String>,
}

impl ConstructionArtifacts {
    pub fn report(&self) -> ArtifactsReport {
        ArtifactsReport {
            lemma: self.lemma,
            alpha1_majorant: self.alpha1_majorant.as_ref().map(|f| f.table()),
            majorant_seed: self.majorant_seed.as_ref().map(|f| f.table()),
            majorant_slope: self.majorant_slope,
            alpha2_ext: self.alpha2_ext.table(),
            beta: self.beta.table(),
            left_slope: self.left_slope,
            junction_slack: self.junction_slack,
            majorant_slack: self.majorant_slack,
            beta_offset: self.beta_offset,
            beta_min_increment: self.beta_min_increment,
            notes: self.notes.clone(),
        }
    }
}

impl Serialize for ConstructionArtifacts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.report().serialize(s)
    }
}

/// Run the construction for `cfg.lemma`.
///
/// `majorant_override` replaces the linear α′₁ in the convex case; it is
/// used as given, so callers certify it separately.
pub fn construct(
    alpha1: Arc<PiecewiseFn>,
    alpha2: Arc<PiecewiseFn>,
    cfg: &LemmaConfig,
    majorant_override: Option<Arc<PiecewiseFn>>,
) -> Result<ConstructionArtifacts> {
    cfg.validate()?;
    let tol = &cfg.tolerances;
    let mut notes = Vec::new();
    let artifacts = match cfg.lemma {
        LemmaCase::ConvexCase => {
            let a = cfg.bound;
            let (seed, slope) = match majorant_override {
                Some(user) => {
                    notes.push(format!("using the supplied majorant `{}`", user.name()));
                    (user, None)
                }
                None => {
                    let m = build_convex_majorant(&alpha1, cfg.window, cfg)?;
                    (Arc::new(m.function), Some(m.slope))
                }
            };
            let left = build_convex_left_extension(&alpha2, cfg)?;
            notes.extend(left.notes.iter().cloned());
            let ext = Arc::new(build_alpha2_ext_convex(&alpha2, seed.clone(), &left, a, tol)?);
            let alpha2_at_bound = eval(&alpha2, a)?;
            let view = Arc::new(
                compose_shift_on(ext.clone(), a, -alpha2_at_bound, Interval::new(0.0, f64::INFINITY))
                    .renamed("alpha1_majorant"),
            );
            let mut major_slack = 0.0f64;
            for x in linspace(Interval::new(0.0, cfg.window.hi), cfg.grid) {
                major_slack = major_slack.max(eval(&alpha1, x)? - eval(&view, x)?);
            }
            let (beta, offset) = build_beta_convex(ext.clone(), a)?;
            ConstructionArtifacts {
                lemma: cfg.lemma,
                alpha1_majorant: Some(view),
                majorant_seed: Some(seed),
                majorant_slope: slope,
                alpha2_ext: ext,
                beta: Arc::new(beta),
                left_slope: left.slope,
                junction_slack: left.junction_slack,
                majorant_slack: major_slack,
                beta_offset: Some(offset),
                beta_min_increment: f64::NAN,
                notes,
            }
        }
        LemmaCase::ConcaveCase => {
            let left = build_concave_left_extension(&alpha2, cfg)?;
            notes.extend(left.notes.iter().cloned());
            let ext = Arc::new(build_alpha2_ext_concave(&alpha2, &left, tol)?);
            let beta = build_beta_concave(alpha1.clone(), ext.clone())?;
            ConstructionArtifacts {
                lemma: cfg.lemma,
                alpha1_majorant: None,
                majorant_seed: None,
                majorant_slope: None,
                alpha2_ext: ext,
                beta: Arc::new(beta),
                left_slope: left.slope,
                junction_slack: left.junction_slack,
                majorant_slack: 0.0,
                beta_offset: None,
                beta_min_increment: f64::NAN,
                notes,
            }
        }
    };
    finish_diagnostics(artifacts, cfg)
}

fn finish_diagnostics(mut artifacts: ConstructionArtifacts, cfg: &LemmaConfig) -> Result<ConstructionArtifacts> {
    let beta = artifacts.beta.clone();
    let origin = eval(&beta, 0.0)?;
    if origin != 0.0 {
        artifacts.notes.push(format!("beta(0) = {origin:e} is not exactly zero"));
    }
    let below = eval(&beta, -1e-12)?;
    if below.abs() > cfg.tolerances.cont {
        artifacts
            .notes
            .push(format!("beta jumps at the origin: beta(-1e-12) = {below:e}"));
    }
    let sum_range = Interval::new(cfg.window.lo, cfg.window.hi + cfg.effective_bound());
    let values: Vec<f64> = linspace(sum_range, cfg.grid)
        .into_iter()
        .map(|u| eval(&beta, u))
        .collect::<Result<_>>()?;
    let min_inc = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_inc < cfg.tolerances.strict {
        artifacts.notes.push(format!(
            "beta increments drop to {min_inc:e} on the grid over {sum_range}"
        ));
    }
    artifacts.beta_min_increment = min_inc;
    Ok(artifacts)
}
