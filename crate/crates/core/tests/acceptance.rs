//! Acceptance run: one PASS/FAIL line per check, non-zero exit if any fail.

use std::sync::Arc;
use std::time::{Duration, Instant};

use kbound::certify::{check_property, Property, PropertyCheckRequest, Tolerances, Verdict};
use kbound::construct::{construct, LemmaCase, LemmaConfig};
use kbound::expr::parse_expr;
use kbound::funcmodel::{Claim, FunctionSpec, Piece, PiecewiseFn};
use kbound::grid::Interval;
use kbound::verify::{certify_lemma, search_counterexample, LemmaOverrides, LemmaReport, LemmaVerdict, SearchRequest};

const GAP_TOL: f64 = 1e-9;
const CASE_BUDGET: Duration = Duration::from_secs(5);

struct Board {
    passed: usize,
    failed: Vec<String>,
}

impl Board {
    fn record(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} [{id}] {detail}", if ok { "PASS" } else { "FAIL" });
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }
}

fn real(name: &str, text: &str, claims: &[Claim]) -> FunctionSpec {
    FunctionSpec::parse(name, text, claims.iter().copied()).unwrap()
}

fn nonneg(name: &str, text: &str, claims: &[Claim]) -> FunctionSpec {
    let f = PiecewiseFn::from_expr(name, parse_expr(text).unwrap(), Interval::new(0.0, f64::INFINITY)).unwrap();
    FunctionSpec::new(f, claims.iter().copied())
}

fn ke_root() -> FunctionSpec {
    let f = PiecewiseFn::new(
        "ke_root",
        vec![
            Piece::expr(f64::NEG_INFINITY, 0.0, parse_expr("-sqrt(-x)").unwrap()),
            Piece::expr(0.0, f64::INFINITY, parse_expr("x").unwrap()),
        ],
    )
    .unwrap();
    FunctionSpec::new(f, [Claim::ClassKe])
}

struct Case {
    label: &'static str,
    alpha1: FunctionSpec,
    alpha2: FunctionSpec,
    cfg: LemmaConfig,
}

fn case(label: &'static str, alpha1: FunctionSpec, alpha2: FunctionSpec, lemma: LemmaCase, a: f64) -> Case {
    let mut cfg = LemmaConfig::new(lemma, a, Interval::new(-10.0, 10.0));
    cfg.grid = 256;
    cfg.levels = 3;
    Case { label, alpha1, alpha2, cfg }
}

fn catalog() -> Vec<Case> {
    let ke = [Claim::ClassKe];
    let convex = [Claim::ClassK, Claim::Convex];
    let concave = [Claim::ClassK, Claim::Concave];
    vec![
        case("x, x, A=1", real("id", "x", &ke), real("lin", "x", &convex), LemmaCase::ConvexCase, 1.0),
        case("x, x^2, A=1", real("id", "x", &ke), real("sq", "x^2", &convex), LemmaCase::ConvexCase, 1.0),
        case("2x, x^2, A=2", real("twice", "2*x", &ke), real("sq", "x^2", &convex), LemmaCase::ConvexCase, 2.0),
        case(
            "exp(x)-1, x^2, A=1",
            real("expm1", "exp(x) - 1", &ke),
            real("sq", "x^2", &convex),
            LemmaCase::ConvexCase,
            1.0,
        ),
        case("ke_root, sqrt, A=4", ke_root(), nonneg("root", "sqrt(x)", &concave), LemmaCase::ConcaveCase, 4.0),
        case(
            "sinh, tanh, A=inf",
            real("sinh", "sinh(x)", &ke),
            real("tanh", "tanh(x)", &concave),
            LemmaCase::ConcaveCase,
            f64::INFINITY,
        ),
    ]
}

fn summary(report: &LemmaReport) -> String {
    let search = report
        .search
        .as_ref()
        .map(|s| format!("max_gap={:e} at ({}, {})", s.max_gap, s.argmax.x1, s.argmax.x2))
        .unwrap_or_else(|| "no search".into());
    let failed: Vec<String> = report
        .failed_hypotheses()
        .map(|h| format!("{:?}", h.property))
        .collect();
    format!("verdict={:?} {search} failed_hypotheses={failed:?}", report.verdict)
}

fn positive_catalog(board: &mut Board) {
    for c in catalog() {
        let start = Instant::now();
        let report = certify_lemma(&c.alpha1, &c.alpha2, &c.cfg, &LemmaOverrides::default());
        let elapsed = start.elapsed();
        match report {
            Ok(r) => {
                let gap_ok = r.search.as_ref().is_some_and(|s| s.max_gap <= GAP_TOL);
                let ok = r.verdict == LemmaVerdict::Certified && gap_ok && elapsed < CASE_BUDGET;
                board.record(
                    "1 positive catalog",
                    ok,
                    format!("({}) {} time={:.2}s", c.label, summary(&r), elapsed.as_secs_f64()),
                );
            }
            Err(e) => board.record("1 positive catalog", false, format!("({}) error: {e}", c.label)),
        }
    }
}

/// Largest `α₁(x₁) + α₂(x₂) − β(x₁ + x₂)` over an `n × n` grid, by plain loops.
fn naive_max_gap(alpha1: &PiecewiseFn, alpha2: &PiecewiseFn, beta: &PiecewiseFn, a: f64, hi: f64, n: usize) -> (f64, f64, f64) {
    let node = |lo: f64, hi: f64, i: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / (n - 1) as f64)
        }
    };
    let x2_hi = a.min(hi);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..n {
        let x1 = node(-a, hi, i);
        let a1 = alpha1.evaluate(x1).unwrap();
        for j in 0..n {
            let x2 = node(0.0, x2_hi, j);
            let gap = (a1 + alpha2.evaluate(x2).unwrap()) - beta.evaluate(x1 + x2).unwrap();
            if gap.total_cmp(&best.0).is_gt() {
                best = (gap, x1, x2);
            }
        }
    }
    best
}

fn square_case() -> (FunctionSpec, FunctionSpec, LemmaConfig) {
    let alpha1 = real("id", "x", &[Claim::ClassKe]);
    let alpha2 = real("sq", "x^2", &[Claim::ClassK, Claim::Convex]);
    let cfg = LemmaConfig::new(LemmaCase::ConvexCase, 1.0, Interval::new(-1.0, 5.0));
    (alpha1, alpha2, cfg)
}

fn negative_controls(board: &mut Board) {
    let alpha1 = real("id", "x", &[Claim::ClassKe]);
    let four = real("four", "4*x", &[Claim::ClassK, Claim::Convex]);
    let cfg = LemmaConfig::new(LemmaCase::ConvexCase, 1.0, Interval::new(-10.0, 10.0));
    let report = certify_lemma(&alpha1, &four, &cfg, &LemmaOverrides::default()).unwrap();
    let domination = report.failed_hypotheses().find(|h| h.property == Property::Domination);
    let ok = report.verdict == LemmaVerdict::HypothesisFailed && domination.is_some_and(|d| !d.witness.is_empty());
    board.record(
        "2 negative controls",
        ok,
        format!(
            "(x, 4x) verdict={:?} domination witness={:?}",
            report.verdict,
            domination.map(|d| d.witness.clone())
        ),
    );

    let (alpha1, alpha2, cfg) = square_case();
    let art = construct(alpha1.function.clone(), alpha2.function.clone(), &cfg, None).unwrap();
    let wrong = Arc::new((*art.alpha2_ext).clone().renamed("beta_unshifted"));
    let overrides = LemmaOverrides {
        beta: Some(wrong.clone()),
        ..Default::default()
    };
    let report = certify_lemma(&alpha1, &alpha2, &cfg, &overrides).unwrap();
    let gap = report.search.as_ref().map_or(f64::NAN, |s| s.max_gap);
    let (oracle, ox1, ox2) = naive_max_gap(&alpha1.function, &alpha2.function, &wrong, 1.0, cfg.window.hi, 1001);
    let ok = report.verdict == LemmaVerdict::Counterexample && gap > 0.1 && oracle > 0.1;
    board.record(
        "2 negative controls",
        ok,
        format!(
            "(x, x^2, unshifted beta) verdict={:?} max_gap={gap} oracle_gap={oracle} at ({ox1}, {ox2})",
            report.verdict
        ),
    );
}

fn oracle_equivalence(board: &mut Board) {
    let (alpha1, alpha2, cfg) = square_case();
    let art = construct(alpha1.function.clone(), alpha2.function.clone(), &cfg, None).unwrap();
    let mut req = SearchRequest::new(1.0, cfg.window, 1001, 0);
    req.tail_checks = false;
    let engine = search_counterexample(&alpha1.function, &alpha2.function, &art.beta, &req, &cfg.tolerances).unwrap();
    let (oracle, x1, x2) = naive_max_gap(&alpha1.function, &alpha2.function, &art.beta, 1.0, cfg.window.hi, 1001);
    let ok = engine.level_max_gaps[0].to_bits() == oracle.to_bits()
        && (engine.argmax.x1, engine.argmax.x2) == (x1, x2);
    board.record(
        "3 oracle equivalence",
        ok,
        format!(
            "engine={:e} at ({}, {}), naive={oracle:e} at ({x1}, {x2}), 1001x1001",
            engine.level_max_gaps[0], engine.argmax.x1, engine.argmax.x2
        ),
    );
}

fn aux_suite(board: &mut Board) {
    let tol = Tolerances::default();
    let window = Interval::new(-5.0, 5.0);
    for text in ["x^2", "x^4", "exp(x) - 1"] {
        let f = PiecewiseFn::from_expr(text, parse_expr(text).unwrap(), Interval::REAL).unwrap();
        for (property, n) in [
            (Property::Superadditive, 201),
            (Property::TranslationConvex, 201),
            (Property::Reflection, 201),
            (Property::DiffQuotientMonotone, 61),
        ] {
            let r = check_property(&f, &PropertyCheckRequest::new(property, window, n), &tol).unwrap();
            board.record(
                "4 auxiliary inequalities",
                r.verdict == Verdict::CertifiedOnGrid,
                format!("({text}, {property:?}, {window}) verdict={:?} max_violation={:e}", r.verdict, r.max_violation),
            );
        }
    }
    let root = PiecewiseFn::from_expr("sqrt", parse_expr("sqrt(x)").unwrap(), Interval::new(0.0, f64::INFINITY)).unwrap();
    let r = check_property(
        &root,
        &PropertyCheckRequest::new(Property::Superadditive, Interval::new(0.0, 1.0), 101),
        &tol,
    )
    .unwrap();
    let expected = 2.0 - 2f64.sqrt();
    let ok = r.verdict == Verdict::Falsified
        && r.witness == vec![vec![1.0, 1.0]]
        && (r.max_violation - expected).abs() <= 1e-12;
    board.record(
        "4 auxiliary inequalities",
        ok,
        format!("(sqrt, Superadditive, [0, 1]) verdict={:?} witness={:?} violation={}", r.verdict, r.witness, r.max_violation),
    );
}

fn construction_exactness(board: &mut Board) {
    for c in catalog() {
        let art = match construct(c.alpha1.function.clone(), c.alpha2.function.clone(), &c.cfg, None) {
            Ok(art) => art,
            Err(e) => {
                board.record("5 construction exactness", false, format!("({}) error: {e}", c.label));
                continue;
            }
        };
        let a = c.cfg.effective_bound();
        let kept_hi = match c.cfg.lemma {
            LemmaCase::ConvexCase => a,
            LemmaCase::ConcaveCase => c.cfg.window.hi,
        };
        let grid: Vec<f64> = (0..=1000).map(|i| kept_hi * i as f64 / 1000.0).collect();
        let origin = art.beta.evaluate(0.0).unwrap();
        let mut kept = true;
        for &x in grid.iter().filter(|&&x| x < kept_hi || c.cfg.lemma == LemmaCase::ConcaveCase) {
            kept &= art.alpha2_ext.evaluate(x).unwrap().to_bits() == c.alpha2.function.evaluate(x).unwrap().to_bits();
        }
        let mut identity = true;
        if let Some(view) = &art.alpha1_majorant {
            let at_bound = c.alpha2.function.evaluate(a).unwrap();
            for i in 0..=1000 {
                let x = c.cfg.window.hi * i as f64 / 1000.0;
                let rhs = art.alpha2_ext.evaluate(x + a).unwrap() - at_bound;
                identity &= view.evaluate(x).unwrap().to_bits() == rhs.to_bits();
            }
        }
        board.record(
            "5 construction exactness",
            origin == 0.0 && kept && identity,
            format!("({}) beta(0)={origin:e} alpha2 kept={kept} majorant identity={identity}", c.label),
        );
    }
}

fn a_independence(board: &mut Board) {
    for c in catalog().into_iter().filter(|c| c.cfg.lemma == LemmaCase::ConcaveCase) {
        let tables: Vec<_> = [2.0, 8.0, f64::INFINITY]
            .into_iter()
            .map(|a| {
                let mut cfg = c.cfg.clone();
                cfg.bound = a;
                construct(c.alpha1.function.clone(), c.alpha2.function.clone(), &cfg, None)
                    .map(|art| art.beta.table())
            })
            .collect();
        let ok = tables.iter().all(|t| t.is_ok()) && tables.windows(2).all(|w| w[0].as_ref().ok() == w[1].as_ref().ok());
        board.record(
            "6 A-independence",
            ok,
            format!("({}) beta tables identical for A in {{2, 8, inf}}: {ok}", c.label),
        );
    }
}

fn determinism(board: &mut Board) {
    let (alpha1, alpha2, cfg) = square_case();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let report = certify_lemma(&alpha1, &alpha2, &cfg, &LemmaOverrides::default()).unwrap();
            serde_json::to_string_pretty(&report).unwrap()
        })
    };
    let one = run(1);
    let eight = run(8);
    board.record(
        "7 determinism",
        one == eight,
        format!("report bytes with 1 thread={} with 8 threads={} identical={}", one.len(), eight.len(), one == eight),
    );
}

fn junction_slack(board: &mut Board) {
    let (alpha1, alpha2, cfg) = square_case();
    let art = construct(alpha1.function, alpha2.function, &cfg, None).unwrap();
    board.record(
        "8 junction slack",
        art.junction_slack <= 2.5e-13,
        format!("(x, x^2) delta_junction={:e} slope={:e}", art.junction_slack, art.left_slope),
    );
}

fn main() {
    let mut board = Board {
        passed: 0,
        failed: Vec::new(),
    };
    positive_catalog(&mut board);
    negative_controls(&mut board);
    oracle_equivalence(&mut board);
    aux_suite(&mut board);
    construction_exactness(&mut board);
    a_independence(&mut board);
    determinism(&mut board);
    junction_slack(&mut board);
    println!(
        "acceptance: {} passed, {} failed {:?}",
        board.passed,
        board.failed.len(),
        board.failed
    );
    if !board.failed.is_empty() {
        std::process::exit(1);
    }
}
