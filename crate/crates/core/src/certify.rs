//! Grid certification and falsification of pointwise properties.
//!
//! Every check evaluates an inequality `lhs <= rhs` over a finite sample set
//! and records the largest `lhs - rhs`. A result of `CERTIFIED_ON_GRID` is
//! grid evidence only; it is never a proof.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::DomainError;
use crate::funcmodel::{Claim, FunctionSpec, PiecewiseFn};
use crate::grid::{linspace, Interval};

/// Above this grid size pair checks switch to adjacent plus seeded random pairs.
pub const ALL_PAIRS_LIMIT: usize = 512;
pub const DEFAULT_SIGMAS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub cont: f64,
    pub strict: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: 1e-9,
            rel: 1e-9,
            cont: 1e-9,
            strict: 1e-12,
        }
    }
}

impl Tolerances {
    /// Allowed excess of the violating side over `bound`.
    pub fn threshold(&self, bound: f64) -> f64 {
        self.abs + self.rel * bound.abs().max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("abs", self.abs), ("rel", self.rel), ("cont", self.cont), ("strict", self.strict)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidRequest(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Property {
    ZeroAtZero,
    StrictlyIncreasing,
    Convex,
    Concave,
    Superadditive,
    TranslationConvex,
    TranslationConcave,
    Reflection,
    DiffQuotientMonotone,
    Nonnegative,
    DomainCoverage,
    Domination,
    MajorantDominance,
    ClassK,
    ClassKe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairStrategy {
    AllPairs,
    Adjacent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedOnGrid,
    Falsified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheckRequest {
    pub property: Property,
    pub window: Interval,
    pub n: usize,
    pub sigma_samples: Vec<f64>,
    pub c_samples: Vec<f64>,
    pub pair_strategy: PairStrategy,
    /// Seeds the random pairs used by [`PairStrategy::Adjacent`].
    pub seed: u64,
}

impl PropertyCheckRequest {
    /// Request with default samples: σ ∈ {0.25, 0.5, 0.75}, translation
    /// offsets of 1/8, 1/4 and 1/2 of the window width (negated for the
    /// concave form), all pairs up to [`ALL_PAIRS_LIMIT`].
    pub fn new(property: Property, window: Interval, n: usize) -> Self {
        let width = window.width();
        let c_samples = match property {
            Property::TranslationConvex => vec![width / 8.0, width / 4.0, width / 2.0],
            Property::TranslationConcave => vec![-width / 8.0, -width / 4.0, -width / 2.0],
            _ => Vec::new(),
        };
        PropertyCheckRequest {
            property,
            window,
            n,
            sigma_samples: DEFAULT_SIGMAS.to_vec(),
            c_samples,
            pair_strategy: if n <= ALL_PAIRS_LIMIT {
                PairStrategy::AllPairs
            } else {
                PairStrategy::Adjacent
            },
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidRequest(format!("grid size must be at least 3, got {}", self.n)));
        }
        if !self.window.is_bounded() || !(self.window.lo < self.window.hi) {
            return Err(Error::InvalidRequest(format!("window {} must be bounded and non-empty", self.window)));
        }
        if self.sigma_samples.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidRequest("sigma samples must lie in [0, 1]".into()));
        }
        if self.property == Property::TranslationConvex && self.c_samples.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidRequest("translation offsets must be >= 0 for the convex form".into()));
        }
        if self.property == Property::TranslationConcave && self.c_samples.iter().any(|c| !(*c <= 0.0)) {
            return Err(Error::InvalidRequest("translation offsets must be <= 0 for the concave form".into()));
        }
        Ok(())
    }

    fn descriptor(&self) -> GridDescriptor {
        let pairs = matches!(
            self.property,
            Property::Convex
                | Property::Concave
                | Property::Superadditive
                | Property::TranslationConvex
                | Property::TranslationConcave
                | Property::DiffQuotientMonotone
        );
        GridDescriptor {
            window: self.window,
            n: self.n,
            seed: (pairs && self.pair_strategy == PairStrategy::Adjacent).then_some(self.seed),
            sigma_samples: if matches!(self.property, Property::Convex | Property::Concave) {
                self.sigma_samples.clone()
            } else {
                Vec::new()
            },
            c_samples: self.c_samples.clone(),
            pair_strategy: pairs.then_some(self.pair_strategy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub window: Interval,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sigma_samples: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub c_samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair_strategy: Option<PairStrategy>,
}

impl GridDescriptor {
    pub fn plain(window: Interval, n: usize) -> Self {
        GridDescriptor {
            window,
            n,
            seed: None,
            sigma_samples: Vec::new(),
            c_samples: Vec::new(),
            pair_strategy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertResult {
    pub property: Property,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subject: Option<String>,
    pub verdict: Verdict,
    /// Largest `lhs - rhs` over the sample set; `-inf` when no sample applied.
    #[serde(with = "crate::grid::extended_f64")]
    pub max_violation: f64,
    /// Sample tuples achieving `max_violation`; non-empty iff falsified.
    pub witness: Vec<Vec<f64>>,
    /// Where `max_violation` is attained, whatever the verdict.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_increment: Option<f64>,
    pub grid: GridDescriptor,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub components: Vec<CertResult>,
}

impl CertResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::CertifiedOnGrid
    }

    fn inconclusive(property: Property, grid: GridDescriptor, note: impl Into<String>) -> Self {
        CertResult {
            property,
            subject: None,
            verdict: Verdict::Inconclusive,
            max_violation: f64::NEG_INFINITY,
            witness: Vec::new(),
            argmax: None,
            min_increment: None,
            grid,
            note: Some(note.into()),
            components: Vec::new(),
        }
    }

    fn with_subject(mut self, subject: &str) -> Self {
        self.subject = Some(subject.to_string());
        self
    }
}

/// Largest violation seen so far. Ties resolve to the lexicographically
/// smallest sample tuple, so the result does not depend on visit order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Worst<const K: usize> {
    pub violation: f64,
    pub bound: f64,
    pub sample: [f64; K],
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl<const K: usize> Worst<K> {
    pub fn beats(&self, other: &Worst<K>) -> bool {
        match self.violation.total_cmp(&other.violation) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => lex_cmp(&self.sample, &other.sample) == Ordering::Less,
        }
    }
}

struct Tracker<const K: usize> {
    worst: Option<Worst<K>>,
}

impl<const K: usize> Tracker<K> {
    fn new() -> Self {
        Tracker { worst: None }
    }

    #[inline]
    fn offer(&mut self, lhs: f64, rhs: f64, sample: [f64; K]) {
        let candidate = Worst {
            violation: lhs - rhs,
            bound: rhs,
            sample,
        };
        if self.worst.as_ref().is_none_or(|w| candidate.beats(w)) {
            self.worst = Some(candidate);
        }
    }

    fn finish(self, property: Property, grid: GridDescriptor, tol: &Tolerances, empty_note: &str) -> CertResult {
        match self.worst {
            None => CertResult::inconclusive(property, grid, empty_note),
            Some(w) => {
                let falsified = w.violation > tol.threshold(w.bound);
                CertResult {
                    property,
                    subject: None,
                    verdict: if falsified {
                        Verdict::Falsified
                    } else {
                        Verdict::CertifiedOnGrid
                    },
                    max_violation: w.violation,
                    witness: if falsified { vec![w.sample.to_vec()] } else { Vec::new() },
                    argmax: Some(w.sample.to_vec()),
                    min_increment: None,
                    grid,
                    note: None,
                    components: Vec::new(),
                }
            }
        }
    }
}

fn eval(f: &PiecewiseFn, x: f64) -> Result<f64> {
    Ok(f.evaluate(x)?)
}

fn sample_pairs(n: usize, strategy: PairStrategy, seed: u64, allow_equal: bool) -> Vec<(usize, usize)> {
    match strategy {
        PairStrategy::AllPairs => {
            let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                let start = if allow_equal { i } else { i + 1 };
                for j in start..n {
                    pairs.push((i, j));
                }
            }
            pairs
        }
        PairStrategy::Adjacent => {
            let mut pairs = Vec::new();
            for i in 0..n {
                if allow_equal {
                    pairs.push((i, i));
                }
                for step in 1..=2 {
                    if i + step < n {
                        pairs.push((i, i + step));
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..4 * n {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                let (i, j) = if a <= b { (a, b) } else { (b, a) };
                if i < j || allow_equal {
                    pairs.push((i, j));
                }
            }
            pairs
        }
    }
}

fn sample_triples(n: usize, strategy: PairStrategy, seed: u64) -> Vec<(usize, usize, usize)> {
    match strategy {
        PairStrategy::AllPairs => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        out.push((i, j, k));
                    }
                }
            }
            out
        }
        PairStrategy::Adjacent => {
            let mut out: Vec<_> = (0..n.saturating_sub(2)).map(|i| (i, i + 1, i + 2)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..4 * n {
                let mut idx = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
                idx.sort_unstable();
                if idx[0] < idx[1] && idx[1] < idx[2] {
                    out.push((idx[0], idx[1], idx[2]));
                }
            }
            out
        }
    }
}

/// Certify or falsify one property of `f` on the request grid.
pub fn check_property(f: &PiecewiseFn, req: &PropertyCheckRequest, tol: &Tolerances) -> Result<CertResult> {
    req.validate()?;
    tol.validate()?;
    let domain = f.domain();
    if !domain.contains_interval(req.window) {
        let x = if req.window.lo < domain.lo { req.window.lo } else { req.window.hi };
        return Err(Error::Domain(DomainError::new(
            x,
            format!("window {} is outside the domain {} of `{}`", req.window, domain, f.name()),
        )));
    }
    let grid = req.descriptor();
    let xs = linspace(req.window, req.n);
    let fs: Vec<f64> = xs.iter().map(|&x| eval(f, x)).collect::<Result<_>>()?;

    let result = match req.property {
        Property::ZeroAtZero => {
            let mut t = Tracker::<1>::new();
            if domain.contains(0.0) {
                t.offer(eval(f, 0.0)?.abs(), 0.0, [0.0]);
            }
            t.finish(req.property, grid, tol, "0 is outside the domain")
        }
        Property::StrictlyIncreasing => strictly_increasing(&xs, &fs, grid, tol),
        Property::Nonnegative => {
            let mut t = Tracker::<1>::new();
            for (&x, &y) in xs.iter().zip(&fs) {
                t.offer(-y, 0.0, [x]);
            }
            t.finish(req.property, grid, tol, "empty grid")
        }
        Property::Convex | Property::Concave => {
            let convex = req.property == Property::Convex;
            let mut t = Tracker::<3>::new();
            for (i, j) in sample_pairs(xs.len(), req.pair_strategy, req.seed, false) {
                let (x, y) = (xs[i], xs[j]);
                for &s in &req.sigma_samples {
                    let mid = s * x + (1.0 - s) * y;
                    let at_mid = eval(f, mid)?;
                    let chord = s * fs[i] + (1.0 - s) * fs[j];
                    if convex {
                        t.offer(at_mid, chord, [x, y, s]);
                    } else {
                        t.offer(chord, at_mid, [x, y, s]);
                    }
                }
            }
            t.finish(req.property, grid, tol, "no sample pairs")
        }
        Property::Superadditive => {
            let nonneg: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= 0.0).collect();
            let mut t = Tracker::<2>::new();
            for (a, b) in sample_pairs(nonneg.len(), req.pair_strategy, req.seed, true) {
                let (i, j) = (nonneg[a], nonneg[b]);
                let sum = eval(f, xs[i] + xs[j])?;
                t.offer(fs[i] + fs[j], sum, [xs[i], xs[j]]);
            }
            t.finish(req.property, grid, tol, "window has no non-negative grid points")
        }
        Property::TranslationConvex | Property::TranslationConcave => translation(f, req, &xs, &fs, grid, tol)?,
        Property::Reflection => {
            let mut t = Tracker::<1>::new();
            for (&x, &y) in xs.iter().zip(&fs) {
                if x > 0.0 && -x >= req.window.lo {
                    let mirrored = eval(f, -x)?;
                    t.offer(-y, mirrored, [x]);
                }
            }
            t.finish(
                req.property,
                grid,
                tol,
                "window does not contain the reflected arguments -x for any grid x >= 0",
            )
        }
        Property::DiffQuotientMonotone => {
            let n = xs.len();
            let dq = |i: usize, j: usize| (fs[j] - fs[i]) / (xs[j] - xs[i]);
            let mut t = Tracker::<3>::new();
            for (i, j, k) in sample_triples(n, req.pair_strategy, req.seed) {
                let dij = dq(i, j);
                let dik = dq(i, k);
                let djk = dq(j, k);
                // increasing in the second argument, then in the first
                t.offer(dij, dik, [xs[i], xs[j], xs[k]]);
                t.offer(dik, djk, [xs[i], xs[j], xs[k]]);
            }
            t.finish(req.property, grid, tol, "grid too small for triples")
        }
        other => {
            return Err(Error::InvalidRequest(format!(
                "{other:?} is not a single-function grid property"
            )))
        }
    };
    Ok(result.with_subject(f.name()))
}

fn strictly_increasing(xs: &[f64], fs: &[f64], grid: GridDescriptor, tol: &Tolerances) -> CertResult {
    let mut t = Tracker::<2>::new();
    let mut min_increment = f64::INFINITY;
    for i in 0..xs.len() - 1 {
        t.offer(fs[i], fs[i + 1], [xs[i], xs[i + 1]]);
        min_increment = min_increment.min(fs[i + 1] - fs[i]);
    }
    let mut result = t.finish(Property::StrictlyIncreasing, grid, tol, "empty grid");
    result.min_increment = Some(min_increment);
    if result.verdict == Verdict::CertifiedOnGrid && min_increment < tol.strict {
        result.verdict = Verdict::Inconclusive;
        result.note = Some(format!(
            "non-decreasing on the grid but the smallest increment {min_increment:e} is below the strictness margin {:e}",
            tol.strict
        ));
    }
    result
}

fn translation(
    f: &PiecewiseFn,
    req: &PropertyCheckRequest,
    xs: &[f64],
    fs: &[f64],
    grid: GridDescriptor,
    tol: &Tolerances,
) -> Result<CertResult> {
    let n = xs.len();
    let mut t = Tracker::<3>::new();
    let mut skipped = 0usize;
    for &c in &req.c_samples {
        // f at every shifted grid point that stays inside the window
        let shifted: Vec<Option<f64>> = xs
            .iter()
            .map(|&x| {
                let s = x + c;
                if req.window.contains(s) {
                    eval(f, s).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        for (i, j) in sample_pairs(n, req.pair_strategy, req.seed, false) {
            match (shifted[i], shifted[j]) {
                (Some(fxc), Some(fyc)) => t.offer(fs[j] - fs[i], fyc - fxc, [xs[i], xs[j], c]),
                _ => skipped += 1,
            }
        }
    }
    let mut result = t.finish(
        req.property,
        grid,
        tol,
        "no sample pair keeps its shifted arguments inside the window",
    );
    if skipped > 0 && result.note.is_none() {
        result.note = Some(format!("{skipped} pair/offset combinations left the window and were not sampled"));
    }
    Ok(result)
}

/// `α₁(−x) ≤ −α₂(x)` on the grid over `[0, bound]`.
pub fn check_domination(
    alpha1: &PiecewiseFn,
    alpha2: &PiecewiseFn,
    bound: f64,
    n: usize,
    tol: &Tolerances,
) -> Result<CertResult> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidRequest(format!(
            "domination bound must be positive and finite (use a surrogate window for A = inf), got {bound}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidRequest("grid size must be at least 2".into()));
    }
    let neg = Interval::new(-bound, 0.0);
    let pos = Interval::new(0.0, bound);
    if !alpha1.domain().contains_interval(neg) {
        return Err(Error::Domain(DomainError::new(
            -bound,
            format!("`{}` is not defined on {neg}", alpha1.name()),
        )));
    }
    if !alpha2.domain().contains_interval(pos) {
        return Err(Error::Domain(DomainError::new(
            bound,
            format!("`{}` is not defined on {pos}", alpha2.name()),
        )));
    }
    let mut t = Tracker::<1>::new();
    for x in linspace(pos, n) {
        let a2 = eval(alpha2, x)?;
        t.offer(eval(alpha1, -x)?, -a2, [x]);
    }
    let result = t.finish(Property::Domination, GridDescriptor::plain(pos, n), tol, "empty grid");
    Ok(result.with_subject(&format!("{}, {}", alpha1.name(), alpha2.name())))
}

/// `majorant(x) ≥ f(x)` on the grid over `window`.
pub fn check_majorant(
    f: &PiecewiseFn,
    majorant: &PiecewiseFn,
    window: Interval,
    n: usize,
    tol: &Tolerances,
) -> Result<CertResult> {
    let mut t = Tracker::<1>::new();
    for x in linspace(window, n) {
        t.offer(eval(f, x)?, eval(majorant, x)?, [x]);
    }
    let result = t.finish(Property::MajorantDominance, GridDescriptor::plain(window, n), tol, "empty grid");
    Ok(result.with_subject(&format!("{}, {}", majorant.name(), f.name())))
}

fn domain_coverage(f: &PiecewiseFn, required: Interval, n: usize, tol: &Tolerances) -> CertResult {
    let domain = f.domain();
    let below = domain.lo - required.lo;
    let above = required.hi - domain.hi;
    let mut t = Tracker::<1>::new();
    t.offer(below, 0.0, [required.lo]);
    t.offer(above, 0.0, [required.hi]);
    let mut result = t.finish(Property::DomainCoverage, GridDescriptor::plain(required, n), tol, "");
    if result.verdict == Verdict::Falsified {
        result.note = Some(format!("domain {domain} does not cover {required}"));
    }
    result
}

fn aggregate(property: Property, grid: GridDescriptor, components: Vec<CertResult>) -> CertResult {
    let pick = components
        .iter()
        .position(|c| c.verdict == Verdict::Falsified)
        .or_else(|| components.iter().position(|c| c.verdict == Verdict::Inconclusive));
    let mut result = match pick {
        Some(i) => {
            let c = &components[i];
            CertResult {
                property,
                subject: None,
                verdict: c.verdict,
                max_violation: c.max_violation,
                witness: c.witness.clone(),
                argmax: c.argmax.clone(),
                min_increment: None,
                grid,
                note: Some(format!("decided by {:?}", c.property)),
                components: Vec::new(),
            }
        }
        None => CertResult {
            property,
            subject: None,
            verdict: Verdict::CertifiedOnGrid,
            max_violation: components
                .iter()
                .map(|c| c.max_violation)
                .fold(f64::NEG_INFINITY, f64::max),
            witness: Vec::new(),
            argmax: None,
            min_increment: None,
            grid,
            note: None,
            components: Vec::new(),
        },
    };
    result.components = components;
    result
}

/// One result per claim of `spec`.
///
/// `ClassK` checks the origin, monotonicity, domain and non-negativity on
/// `[0, window.hi]`; `ClassKe` checks origin, monotonicity and domain on the
/// whole window. Convexity claims are checked on the part of the window the
/// function is defined on, restricted to `x >= 0` for a class K function.
pub fn classify(spec: &FunctionSpec, window: Interval, n: usize, tol: &Tolerances) -> Result<Vec<CertResult>> {
    classify_seeded(spec, window, n, 0, tol)
}

/// As [`classify`], seeding the random pairs used on large grids.
pub fn classify_seeded(
    spec: &FunctionSpec,
    window: Interval,
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CertResult>> {
    let request = |property, window, n| PropertyCheckRequest {
        seed,
        ..PropertyCheckRequest::new(property, window, n)
    };
    if spec.claims.is_empty() {
        return Err(Error::InvalidRequest(format!("`{}` has no claims to check", spec.name)));
    }
    let f = spec.function.as_ref();
    let mut out = Vec::new();
    for claim in &spec.claims {
        let result = match claim {
            Claim::ClassK | Claim::ClassKe => {
                let (required, property) = if *claim == Claim::ClassK {
                    if !(window.hi > 0.0) {
                        return Err(Error::InvalidRequest(format!(
                            "class K check needs window.hi > 0, got {window}"
                        )));
                    }
                    (Interval::new(0.0, window.hi), Property::ClassK)
                } else {
                    (window, Property::ClassKe)
                };
                let coverage = domain_coverage(f, required, n, tol);
                let mut components = vec![coverage.clone()];
                if coverage.passed() {
                    components.push(check_property(f, &request(Property::ZeroAtZero, required, n), tol)?);
                    components.push(check_property(
                        f,
                        &request(Property::StrictlyIncreasing, required, n),
                        tol,
                    )?);
                    if *claim == Claim::ClassK {
                        components.push(check_property(f, &request(Property::Nonnegative, required, n), tol)?);
                    }
                }
                aggregate(property, GridDescriptor::plain(required, n), components)
            }
            Claim::Convex | Claim::Concave => {
                let property = if *claim == Claim::Convex {
                    Property::Convex
                } else {
                    Property::Concave
                };
                let mut effective = window.intersect(f.domain());
                if spec.claims.contains(&Claim::ClassK) && !spec.claims.contains(&Claim::ClassKe) {
                    effective = effective.and_then(|w| w.intersect(Interval::new(0.0, f64::INFINITY)));
                }
                match effective.filter(|w| w.lo < w.hi) {
                    Some(w) => check_property(f, &request(property, w, n), tol)?,
                    None => CertResult::inconclusive(
                        property,
                        GridDescriptor::plain(window, n),
                        format!("window {window} does not overlap the domain {}", f.domain()),
                    ),
                }
            }
        };
        out.push(result.with_subject(&spec.name));
    }
    Ok(out)
}
