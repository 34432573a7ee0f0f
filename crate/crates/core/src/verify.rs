//! Counterexample search for `α₁(x₁) + α₂(x₂) ≤ β(x₁ + x₂)` and the
//! end-to-end certification pipeline.
//!
//! The search evaluates an `n × n` grid over `x₁ ∈ [−A, window.hi]`,
//! `x₂ ∈ [0, min(A, window.hi)]`, then zooms in around the worst point a
//! fixed number of times, halving the span at each level. Rows are split
//! into bands evaluated in parallel; the reduction is a total order on
//! `(gap desc, x₁ asc, x₂ asc)`, so results do not depend on scheduling.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{check_domination, check_majorant, classify_seeded, CertResult, Tolerances, Verdict};
use crate::construct::{construct, ConstructionArtifacts, LemmaCase, LemmaConfig};
use crate::error::{Error, Result};
use crate::expr::DomainError;
use crate::funcmodel::{Claim, FunctionSpec, PiecewiseFn};
use crate::grid::{linspace, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub x1: f64,
    pub x2: f64,
    pub u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl SearchPoint {
    /// Total order used by the max-reduction: larger gap first, then the
    /// lexicographically smaller `(x1, x2)`.
    fn rank(&self, other: &SearchPoint) -> Ordering {
        self.gap
            .total_cmp(&other.gap)
            .then_with(|| other.x1.total_cmp(&self.x1))
            .then_with(|| other.x2.total_cmp(&self.x2))
    }

    fn better(self, other: SearchPoint) -> SearchPoint {
        if other.rank(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SearchVerdict {
    BoundHoldsOnGrid,
    Counterexample,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    /// Finite `A` (the surrogate bound when `A = ∞`).
    pub bound: f64,
    pub window: Interval,
    pub n: usize,
    pub levels: usize,
    /// Row bands evaluated concurrently; affects scheduling only.
    #[serde(skip)]
    pub bands: usize,
    #[serde(skip)]
    pub tail_checks: bool,
}

impl SearchRequest {
    pub fn new(bound: f64, window: Interval, n: usize, levels: usize) -> Self {
        SearchRequest {
            bound,
            window,
            n,
            levels,
            bands: 16,
            tail_checks: true,
        }
    }

    pub fn x1_range(&self) -> Interval {
        Interval::new(-self.bound, self.window.hi)
    }

    pub fn x2_range(&self) -> Interval {
        Interval::new(0.0, self.bound.min(self.window.hi))
    }

    fn validate(&self) -> Result<()> {
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::InvalidRequest(format!("search bound must be positive and finite, got {}", self.bound)));
        }
        if !(self.window.hi > 0.0 && self.window.hi.is_finite()) {
            return Err(Error::InvalidRequest(format!("search window {} needs a finite positive upper end", self.window)));
        }
        if self.n < 2 {
            return Err(Error::InvalidRequest("search grid needs at least 2 points per axis".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub points_checked: usize,
    pub points_skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst: Option<SearchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub max_gap: f64,
    pub argmax: SearchPoint,
    /// Worst gap found at each level, level 0 first.
    pub level_max_gaps: Vec<f64>,
    pub points_evaluated: u64,
    pub refinement_levels_used: usize,
    pub verdict: SearchVerdict,
    pub threshold: f64,
    pub x1_range: Interval,
    pub x2_range: Interval,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail: Option<TailCheck>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

struct Subjects<'a> {
    alpha1: &'a PiecewiseFn,
    alpha2: &'a PiecewiseFn,
    beta: &'a PiecewiseFn,
}

impl Subjects<'_> {
    fn point(&self, x1: f64, a1: f64, x2: f64, a2: f64) -> std::result::Result<SearchPoint, DomainError> {
        let u = x1 + x2;
        let lhs = a1 + a2;
        let rhs = self.beta.evaluate(u)?;
        let gap = lhs - rhs;
        if !gap.is_finite() {
            return Err(DomainError::new(u, format!("non-finite gap at (x1, x2) = ({x1}, {x2})")));
        }
        Ok(SearchPoint { x1, x2, u, lhs, rhs, gap })
    }

    fn values(f: &PiecewiseFn, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| Ok(f.evaluate(x)?)).collect()
    }

    /// Worst point of the `xs1 × xs2` grid, or all points when `keep` is set.
    fn scan(&self, xs1: &[f64], xs2: &[f64], bands: usize, keep: bool) -> Result<(SearchPoint, Vec<SearchPoint>)> {
        let a1 = Self::values(self.alpha1, xs1)?;
        let a2 = Self::values(self.alpha2, xs2)?;
        let bands = bands.clamp(1, xs1.len());
        let rows = xs1.len().div_ceil(bands);
        let per_band: Vec<Result<(Option<SearchPoint>, Vec<SearchPoint>)>> = (0..bands)
            .into_par_iter()
            .map(|b| {
                let mut best: Option<SearchPoint> = None;
                let mut kept = Vec::new();
                for i in b * rows..((b + 1) * rows).min(xs1.len()) {
                    for (j, &x2) in xs2.iter().enumerate() {
                        let p = self.point(xs1[i], a1[i], x2, a2[j])?;
                        best = Some(best.map_or(p, |q| q.better(p)));
                        if keep {
                            kept.push(p);
                        }
                    }
                }
                Ok((best, kept))
            })
            .collect();
        let mut best: Option<SearchPoint> = None;
        let mut all = Vec::new();
        for band in per_band {
            let (b, kept) = band?;
            if let Some(p) = b {
                best = Some(best.map_or(p, |q| q.better(p)));
            }
            all.extend(kept);
        }
        let best = best.ok_or_else(|| Error::InvalidRequest("empty search grid".into()))?;
        Ok((best, all))
    }
}

fn require(f: &PiecewiseFn, needed: Interval, role: &str) -> Result<()> {
    if f.domain().contains_interval(needed) {
        return Ok(());
    }
    let x = if needed.lo < f.domain().lo { needed.lo } else { needed.hi };
    Err(Error::Domain(DomainError::new(
        x,
        format!("{role} `{}` must be defined on {needed}, domain is {}", f.name(), f.domain()),
    )))
}

fn check_ranges(subjects: &Subjects, req: &SearchRequest) -> Result<()> {
    req.validate()?;
    let r1 = req.x1_range();
    let r2 = req.x2_range();
    require(subjects.alpha1, r1, "alpha1")?;
    require(subjects.alpha2, r2, "alpha2")?;
    require(subjects.beta, Interval::new(r1.lo + r2.lo, r1.hi + r2.hi), "beta")
}

fn zoom(range: Interval, center: f64, span: f64) -> Interval {
    Interval::new((center - span / 2.0).max(range.lo), (center + span / 2.0).min(range.hi))
}

fn tail_check(subjects: &Subjects, req: &SearchRequest) -> TailCheck {
    let hi = req.window.hi;
    let r2 = req.x2_range();
    let mut check = TailCheck {
        points_checked: 0,
        points_skipped: 0,
        worst: None,
    };
    for k in 0..10 {
        let x1 = hi * 100f64.powf(k as f64 / 9.0);
        for x2 in [r2.lo, (r2.lo + r2.hi) / 2.0, r2.hi] {
            let point = subjects
                .alpha1
                .evaluate(x1)
                .and_then(|a1| subjects.alpha2.evaluate(x2).and_then(|a2| subjects.point(x1, a1, x2, a2)));
            match point {
                Ok(p) => {
                    check.points_checked += 1;
                    check.worst = Some(check.worst.map_or(p, |w| w.better(p)));
                }
                Err(_) => check.points_skipped += 1,
            }
        }
    }
    check
}

/// Grid search for the worst gap `α₁(x₁) + α₂(x₂) − β(x₁ + x₂)`.
pub fn search_counterexample(
    alpha1: &PiecewiseFn,
    alpha2: &PiecewiseFn,
    beta: &PiecewiseFn,
    req: &SearchRequest,
    tol: &Tolerances,
) -> Result<SearchResult> {
    let subjects = Subjects { alpha1, alpha2, beta };
    check_ranges(&subjects, req)?;
    let r1 = req.x1_range();
    let r2 = req.x2_range();

    let (mut best, _) = subjects.scan(&linspace(r1, req.n), &linspace(r2, req.n), req.bands, false)?;
    let mut level_max_gaps = vec![best.gap];
    let mut points = (req.n * req.n) as u64;
    for level in 1..=req.levels {
        let scale = 0.5f64.powi(level as i32);
        let w1 = zoom(r1, best.x1, r1.width() * scale);
        let w2 = zoom(r2, best.x2, r2.width() * scale);
        let (found, _) = subjects.scan(&linspace(w1, req.n), &linspace(w2, req.n), req.bands, false)?;
        level_max_gaps.push(found.gap);
        points += (req.n * req.n) as u64;
        best = best.better(found);
    }

    let threshold = tol.threshold(best.rhs);
    let mut verdict = if best.gap > threshold {
        SearchVerdict::Counterexample
    } else {
        SearchVerdict::BoundHoldsOnGrid
    };
    let mut note = None;
    let tail = req.tail_checks.then(|| tail_check(&subjects, req));
    if let Some(t) = &tail {
        if let Some(w) = t.worst.filter(|w| w.gap > tol.threshold(w.rhs)) {
            if verdict == SearchVerdict::BoundHoldsOnGrid {
                verdict = SearchVerdict::Inconclusive;
                note = Some(format!(
                    "bound holds on the grid but a tail check beyond the window fails at (x1, x2) = ({}, {}) with gap {:e}",
                    w.x1, w.x2, w.gap
                ));
            }
        }
        if t.points_skipped > 0 && note.is_none() {
            note = Some(format!("{} tail points outside the function domains were skipped", t.points_skipped));
        }
    }
    Ok(SearchResult {
        max_gap: best.gap,
        argmax: best,
        level_max_gaps,
        points_evaluated: points,
        refinement_levels_used: req.levels,
        verdict,
        threshold,
        x1_range: r1,
        x2_range: r2,
        n: req.n,
        tail,
        note,
    })
}

/// Every point of the level-0 grid, row-major in `x1`.
pub fn level0_samples(
    alpha1: &PiecewiseFn,
    alpha2: &PiecewiseFn,
    beta: &PiecewiseFn,
    req: &SearchRequest,
) -> Result<Vec<SearchPoint>> {
    let subjects = Subjects { alpha1, alpha2, beta };
    check_ranges(&subjects, req)?;
    let (_, all) = subjects.scan(&linspace(req.x1_range(), req.n), &linspace(req.x2_range(), req.n), req.bands, true)?;
    Ok(all)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LemmaVerdict {
    Certified,
    HypothesisFailed,
    Counterexample,
    Inconclusive,
}

/// Optional replacements for parts of the construction.
#[derive(Debug, Clone, Default)]
pub struct LemmaOverrides {
    /// Convex class K majorant of α₁ used instead of the linear one.
    pub majorant: Option<Arc<PiecewiseFn>>,
    /// β to search against instead of the constructed one.
    pub beta: Option<Arc<PiecewiseFn>>,
    pub bands: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub config: LemmaConfig,
    pub alpha1: String,
    pub alpha2: String,
    pub hypotheses: Vec<CertResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionArtifacts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_override: Option<crate::funcmodel::FunctionTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchResult>,
    pub verdict: LemmaVerdict,
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn failed_hypotheses(&self) -> impl Iterator<Item = &CertResult> {
        self.hypotheses.iter().filter(|h| h.verdict == Verdict::Falsified)
    }
}

fn require_claims(spec: &FunctionSpec, needed: &[Claim], lemma: LemmaCase) -> Result<()> {
    let missing: Vec<&str> = needed
        .iter()
        .filter(|c| !spec.claims.contains(c))
        .map(|c| c.tag())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::ClaimMismatch {
            function: spec.name.clone(),
            missing: missing.join(", "),
            lemma: lemma.label().to_string(),
        })
    }
}

fn labelled(mut results: Vec<CertResult>, subject: &str) -> Vec<CertResult> {
    for r in &mut results {
        r.subject.get_or_insert_with(|| subject.to_string());
    }
    results
}

/// Certify the hypotheses, build β and search for counterexamples.
///
/// Every step that can run does run, so a report with a failed hypothesis
/// still shows what the construction and the search produce.
pub fn certify_lemma(
    alpha1: &FunctionSpec,
    alpha2: &FunctionSpec,
    cfg: &LemmaConfig,
    overrides: &LemmaOverrides,
) -> Result<LemmaReport> {
    cfg.validate()?;
    let shape = match cfg.lemma {
        LemmaCase::ConvexCase => Claim::Convex,
        LemmaCase::ConcaveCase => Claim::Concave,
    };
    require_claims(alpha1, &[Claim::ClassKe], cfg.lemma)?;
    require_claims(alpha2, &[Claim::ClassK, shape], cfg.lemma)?;

    let tol = &cfg.tolerances;
    let n = cfg.grid;
    let a = cfg.effective_bound();
    let window = cfg.window;
    let alpha2_window = match cfg.lemma {
        LemmaCase::ConvexCase => Interval::new(window.lo, a),
        LemmaCase::ConcaveCase => window,
    };
    let mut notes = Vec::new();
    if !cfg.bound.is_finite() {
        notes.push(format!("A = inf is represented by the window {window}"));
    }

    let mut hypotheses = labelled(classify_seeded(alpha1, window, n, cfg.seed, tol)?, &alpha1.name);
    hypotheses.extend(labelled(classify_seeded(alpha2, alpha2_window, n, cfg.seed, tol)?, &alpha2.name));
    hypotheses.push(check_domination(&alpha1.function, &alpha2.function, a, n, tol)?);

    let positive = Interval::new(0.0, window.hi);
    if let Some(user) = &overrides.majorant {
        let spec = FunctionSpec::new((**user).clone(), [Claim::ClassK, Claim::Convex]);
        hypotheses.extend(labelled(classify_seeded(&spec, positive, n, cfg.seed, tol)?, user.name()));
    }
    let hypotheses_falsified = hypotheses.iter().any(|h| h.verdict == Verdict::Falsified);

    let construction = match construct(
        alpha1.function.clone(),
        alpha2.function.clone(),
        cfg,
        overrides.majorant.clone(),
    ) {
        Ok(art) => Some(art),
        Err(e) if hypotheses_falsified => {
            notes.push(format!("construction skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(art) = &construction {
        if let Some(view) = &art.alpha1_majorant {
            hypotheses.push(check_majorant(&alpha1.function, view, positive, n, tol)?);
        }
    }

    let beta = match (&overrides.beta, &construction) {
        (Some(b), _) => {
            notes.push(format!("searching against the supplied beta `{}`", b.name()));
            Some(b.clone())
        }
        (None, Some(art)) => Some(art.beta.clone()),
        (None, None) => None,
    };
    let search = match beta {
        Some(beta) => {
            let mut req = SearchRequest::new(a, window, n, cfg.levels);
            if let Some(bands) = overrides.bands {
                req.bands = bands;
            }
            match search_counterexample(&alpha1.function, &alpha2.function, &beta, &req, tol) {
                Ok(s) => Some(s),
                Err(e) if hypotheses_falsified => {
                    notes.push(format!("search skipped: {e}"));
                    None
                }
                Err(e) => return Err(e),
            }
        }
        None => None,
    };

    let any_inconclusive = hypotheses.iter().any(|h| h.verdict == Verdict::Inconclusive);
    let verdict = if hypotheses_falsified {
        LemmaVerdict::HypothesisFailed
    } else {
        match search.as_ref().map(|s| s.verdict) {
            Some(SearchVerdict::Counterexample) => LemmaVerdict::Counterexample,
            Some(SearchVerdict::BoundHoldsOnGrid) if !any_inconclusive => LemmaVerdict::Certified,
            _ => LemmaVerdict::Inconclusive,
        }
    };
    if let Some(first) = hypotheses.iter().find(|h| h.verdict == Verdict::Falsified) {
        notes.push(format!(
            "hypothesis {:?} failed for {}",
            first.property,
            first.subject.as_deref().unwrap_or("?")
        ));
    }

    Ok(LemmaReport {
        config: cfg.clone(),
        alpha1: alpha1.name.clone(),
        alpha2: alpha2.name.clone(),
        hypotheses,
        construction,
        beta_override: overrides.beta.as_ref().map(|b| b.table()),
        search,
        verdict,
        notes,
    })
}

/// Which case to run when the caller did not choose: convex wins when α₂
/// claims both shapes.
pub fn default_case(alpha2: &FunctionSpec) -> Option<LemmaCase> {
    if alpha2.claims.contains(&Claim::Convex) {
        Some(LemmaCase::ConvexCase)
    } else if alpha2.claims.contains(&Claim::Concave) {
        Some(LemmaCase::ConcaveCase)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Property;
    use crate::funcmodel::Piece;

    fn spec(name: &str, text: &str, claims: &[Claim]) -> FunctionSpec {
        FunctionSpec::parse(name, text, claims.iter().copied()).unwrap()
    }

    fn cfg(lemma: LemmaCase, a: f64, lo: f64, hi: f64) -> LemmaConfig {
        LemmaConfig::new(lemma, a, Interval::new(lo, hi))
    }

    #[test]
    fn identity_pair_is_tight() {
        let id = spec("id", "x", &[Claim::ClassKe]);
        let id2 = spec("id2", "x", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let report = certify_lemma(&id, &id2, &c, &LemmaOverrides::default()).unwrap();
        assert_eq!(report.verdict, LemmaVerdict::Certified, "{:?}", report.notes);
        let s = report.search.unwrap();
        assert!(s.max_gap.abs() <= 1e-15, "{}", s.max_gap);

        let exact = Arc::new(PiecewiseFn::from_expr("beta", crate::expr::parse_expr("x").unwrap(), Interval::REAL).unwrap());
        let req = SearchRequest::new(1.0, Interval::new(-1.0, 5.0), 64, 2);
        let s = search_counterexample(&id.function, &id2.function, &exact, &req, &Tolerances::default()).unwrap();
        assert_eq!(s.max_gap, 0.0);
        assert_eq!(s.verdict, SearchVerdict::BoundHoldsOnGrid);
        assert_eq!(s.points_evaluated, 3 * 64 * 64);
    }

    #[test]
    fn square_case_certifies_with_frontier_at_bound() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let report = certify_lemma(&a1, &a2, &c, &LemmaOverrides::default()).unwrap();
        assert_eq!(report.verdict, LemmaVerdict::Certified, "{:?}", report.notes);
        let s = report.search.as_ref().unwrap();
        assert!(s.max_gap <= 1e-9);
        assert!(s.max_gap >= -1e-9);
        assert_eq!((s.argmax.x1, s.argmax.x2), (-1.0, 1.0));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""verdict":"CERTIFIED""#));
    }

    #[test]
    fn domination_failure_is_reported() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("four", "4*x", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let report = certify_lemma(&a1, &a2, &c, &LemmaOverrides::default()).unwrap();
        assert_eq!(report.verdict, LemmaVerdict::HypothesisFailed);
        let failed: Vec<_> = report.failed_hypotheses().collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].property, Property::Domination);
        assert_eq!(failed[0].witness, vec![vec![1.0]]);
    }

    #[test]
    fn missing_claims_are_rejected() {
        let a1 = spec("id", "x", &[Claim::ClassK]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let err = certify_lemma(&a1, &a2, &c, &LemmaOverrides::default()).unwrap_err();
        assert!(matches!(err, Error::ClaimMismatch { .. }), "{err}");
    }

    fn unshifted_beta(a1: &FunctionSpec, a2: &FunctionSpec, c: &LemmaConfig) -> Arc<PiecewiseFn> {
        let art = construct(a1.function.clone(), a2.function.clone(), c, None).unwrap();
        Arc::new((*art.alpha2_ext).clone().renamed("beta_unshifted"))
    }

    #[test]
    fn wrong_beta_is_caught() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let overrides = LemmaOverrides {
            beta: Some(unshifted_beta(&a1, &a2, &c)),
            ..Default::default()
        };
        let report = certify_lemma(&a1, &a2, &c, &overrides).unwrap();
        assert_eq!(report.verdict, LemmaVerdict::Counterexample);
        let s = report.search.unwrap();
        assert!(s.max_gap > 0.1, "{}", s.max_gap);
    }

    #[test]
    fn partition_count_does_not_matter() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let beta = unshifted_beta(&a1, &a2, &c);
        let mut results = Vec::new();
        for bands in [1, 4, 16, 1000] {
            let mut req = SearchRequest::new(1.0, c.window, 101, 2);
            req.bands = bands;
            results.push(search_counterexample(&a1.function, &a2.function, &beta, &req, &c.tolerances).unwrap());
        }
        for r in &results[1..] {
            assert_eq!(r, &results[0]);
        }
    }

    #[test]
    fn level_zero_matches_samples() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let c = cfg(LemmaCase::ConvexCase, 1.0, -1.0, 5.0);
        let beta = unshifted_beta(&a1, &a2, &c);
        let req = SearchRequest::new(1.0, c.window, 33, 0);
        let samples = level0_samples(&a1.function, &a2.function, &beta, &req).unwrap();
        assert_eq!(samples.len(), 33 * 33);
        let best = samples.iter().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max);
        let s = search_counterexample(&a1.function, &a2.function, &beta, &req, &c.tolerances).unwrap();
        assert_eq!(s.max_gap, best);
        assert_eq!(s.level_max_gaps.len(), 1);
    }

    #[test]
    fn undefined_beta_is_a_domain_error() {
        let a1 = spec("id", "x", &[Claim::ClassKe]);
        let a2 = spec("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
        let short = PiecewiseFn::new("short", vec![Piece::expr(-1.0, 1.0, crate::expr::ExprNode::Var)]).unwrap();
        let req = SearchRequest::new(1.0, Interval::new(-1.0, 5.0), 16, 1);
        let err = search_counterexample(&a1.function, &a2.function, &short, &req, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn tanh_concave_case_certifies() {
        let a1 = spec("sinh", "sinh(x)", &[Claim::ClassKe]);
        let a2 = spec("tanh", "tanh(x)", &[Claim::ClassK, Claim::Concave]);
        let c = cfg(LemmaCase::ConcaveCase, f64::INFINITY, -10.0, 10.0);
        let report = certify_lemma(&a1, &a2, &c, &LemmaOverrides::default()).unwrap();
        assert_eq!(report.verdict, LemmaVerdict::Certified, "{:#?}", report.notes);
    }
}
