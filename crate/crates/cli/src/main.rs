//! `kbound` command-line front end.
//!
//! Exit codes: 0 certified, 1 falsified / counterexample / failed
//! hypothesis, 2 inconclusive, 3 no convex majorant, 64 usage, 65 bad input
//! data, 74 I/O.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use kbound::certify::{classify_seeded, Tolerances, Verdict};
use kbound::construct::{construct, LemmaCase, LemmaConfig};
use kbound::definitions::{load_definitions, Definitions, LoadError};
use kbound::funcmodel::{FunctionSpec, PiecewiseFn};
use kbound::grid::Interval;
use kbound::verify::{certify_lemma, default_case, level0_samples, LemmaOverrides, LemmaVerdict, SearchRequest};

#[derive(Parser)]
#[command(name = "kbound", version, about = "Certify additive bounds for comparison functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the claims attached to functions in a definition file.
    Check(CheckArgs),
    /// Build the bounding function for a pair of functions.
    Construct(LemmaArgs),
    /// Check hypotheses, build the bound and search for counterexamples.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Function definition file.
    #[arg(long)]
    input: PathBuf,
    /// Window as LO:HI.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<Interval>,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol_abs: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_rel: f64,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            abs: self.tol_abs,
            rel: self.tol_rel,
            ..Tolerances::default()
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Only check this function (and `--alpha2`, if given).
    #[arg(long)]
    alpha1: Option<String>,
    #[arg(long)]
    alpha2: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaArg {
    Convex,
    Concave,
}

#[derive(Args)]
struct LemmaArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha1: String,
    #[arg(long)]
    alpha2: String,
    /// Defaults to convex when alpha2 claims Convex, else concave.
    #[arg(long, value_enum)]
    lemma: Option<LemmaArg>,
    /// Bound A, a positive number or `inf` (concave case only; the default there).
    #[arg(long = "A", value_parser = parse_bound)]
    bound: Option<f64>,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Function from the input file to use as the convex majorant of alpha1.
    #[arg(long)]
    majorant: Option<String>,
    /// Write plotting samples here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    lemma: LemmaArgs,
    /// Search against the function `beta` from this file instead of the constructed one.
    #[arg(long)]
    beta_from_file: Option<PathBuf>,
}

fn parse_window(text: &str) -> Result<Interval, String> {
    let (lo, hi) = text.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower end `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper end `{hi}`"))?;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(format!("window {lo}:{hi} must be finite with LO < HI"));
    }
    Ok(Interval::new(lo, hi))
}

fn parse_bound(text: &str) -> Result<f64, String> {
    let a = match text.trim() {
        "inf" | "+inf" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|_| format!("bad bound `{t}`"))?,
    };
    if a > 0.0 {
        Ok(a)
    } else {
        Err(format!("A must be positive, got {text}"))
    }
}

enum Failure {
    Usage(String),
    Data(String),
    Io(String),
    NoMajorant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Data(_) => 65,
            Failure::Io(_) => 74,
            Failure::NoMajorant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) | Failure::NoMajorant(m) => m,
        }
    }
}

impl From<kbound::Error> for Failure {
    fn from(e: kbound::Error) -> Self {
        match e {
            kbound::Error::MajorantUnavailable { .. } => Failure::NoMajorant(e.to_string()),
            kbound::Error::InvalidRequest(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io(_) => Failure::Io(e.to_string()),
            LoadError::Parse(inner) => inner.into(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path, tol: &Tolerances) -> Result<Definitions, Failure> {
    load_definitions(path, tol.cont).map_err(|e| match e {
        LoadError::Io(io) => io_failure(path, io),
        other => other.into(),
    })
}

fn lookup<'a>(defs: &'a Definitions, name: &str, path: &Path) -> Result<&'a FunctionSpec, Failure> {
    defs.get(name)
        .ok_or_else(|| Failure::Usage(format!("no function `{name}` in {}", path.display())))
}

fn write_report(path: Option<&Path>, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<(), Failure> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(value).map_err(|e| Failure::Data(e.to_string()))
}

fn cmd_check(args: &CheckArgs) -> Outcome {
    let common = &args.common;
    let tol = common.tolerances();
    let defs = load(&common.input, &tol)?;
    let window = common.window.unwrap_or(Interval::new(-10.0, 10.0));
    let selected: Vec<&FunctionSpec> = match (&args.alpha1, &args.alpha2) {
        (None, None) => defs.specs().iter().collect(),
        (a, b) => a
            .iter()
            .chain(b.iter())
            .map(|name| lookup(&defs, name, &common.input))
            .collect::<Result<_, _>>()?,
    };

    let mut functions = Vec::new();
    let mut skipped = Vec::new();
    let mut worst = 0u8;
    for spec in selected {
        if spec.claims.is_empty() {
            skipped.push(spec.name.clone());
            continue;
        }
        let results = classify_seeded(spec, window, common.grid, common.seed, &tol)?;
        for r in &results {
            let code = match r.verdict {
                Verdict::CertifiedOnGrid => 0,
                Verdict::Falsified => 1,
                Verdict::Inconclusive => 2,
            };
            worst = match (worst, code) {
                (1, _) | (_, 1) => 1,
                (a, b) => a.max(b),
            };
        }
        functions.push(json!({
            "name": spec.name,
            "claims": spec.claims.iter().map(|c| c.tag()).collect::<Vec<_>>(),
            "results": to_json(&results)?,
        }));
    }
    write_report(
        common.report.as_deref(),
        &json!({
            "window": to_json(&window)?,
            "grid": common.grid,
            "seed": common.seed,
            "functions": functions,
            "skipped": skipped,
        }),
    )?;
    Ok(worst)
}

fn lemma_config(args: &LemmaArgs, alpha2: &FunctionSpec) -> Result<LemmaConfig, Failure> {
    let lemma = match args.lemma {
        Some(LemmaArg::Convex) => LemmaCase::ConvexCase,
        Some(LemmaArg::Concave) => LemmaCase::ConcaveCase,
        None => default_case(alpha2).ok_or_else(|| {
            Failure::Usage(format!("`{}` claims neither Convex nor Concave; pass --lemma", alpha2.name))
        })?,
    };
    let bound = match (args.bound, lemma) {
        (Some(a), _) => a,
        (None, LemmaCase::ConcaveCase) => f64::INFINITY,
        (None, LemmaCase::ConvexCase) => return Err(Failure::Usage("the convex case needs --A".into())),
    };
    let reach = if bound.is_finite() { bound.max(10.0) } else { 10.0 };
    let window = args.common.window.unwrap_or(Interval::new(-reach, reach));
    let mut cfg = LemmaConfig::new(lemma, bound, window);
    cfg.grid = args.common.grid;
    cfg.levels = args.levels;
    cfg.seed = args.common.seed;
    cfg.tolerances = args.common.tolerances();
    cfg.validate()?;
    Ok(cfg)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}-{suffix}{ext}"))
}

fn function_csv(path: &Path, f: &PiecewiseFn, window: Interval, n: usize) -> Result<(), Failure> {
    let samples = f.sample(window, n)?;
    write_csv(path, "x,value", samples.into_iter().map(|(x, v)| vec![x, v]))
}

struct Loaded {
    defs: Definitions,
    cfg: LemmaConfig,
}

fn load_lemma(args: &LemmaArgs) -> Result<Loaded, Failure> {
    let tol = args.common.tolerances();
    let defs = load(&args.common.input, &tol)?;
    let alpha2 = lookup(&defs, &args.alpha2, &args.common.input)?;
    let cfg = lemma_config(args, alpha2)?;
    lookup(&defs, &args.alpha1, &args.common.input)?;
    Ok(Loaded { defs, cfg })
}

fn majorant_of(args: &LemmaArgs, defs: &Definitions) -> Result<Option<Arc<PiecewiseFn>>, Failure> {
    args.majorant
        .as_ref()
        .map(|name| lookup(defs, name, &args.common.input).map(|s| s.function.clone()))
        .transpose()
}

fn cmd_construct(args: &LemmaArgs) -> Outcome {
    let Loaded { defs, cfg } = load_lemma(args)?;
    let alpha1 = lookup(&defs, &args.alpha1, &args.common.input)?;
    let alpha2 = lookup(&defs, &args.alpha2, &args.common.input)?;
    let artifacts = construct(alpha1.function.clone(), alpha2.function.clone(), &cfg, majorant_of(args, &defs)?)?;
    if let Some(path) = &args.csv {
        function_csv(path, &artifacts.beta, cfg.window, cfg.grid)?;
        function_csv(&sibling(path, "alpha2-ext"), &artifacts.alpha2_ext, cfg.window, cfg.grid)?;
    }
    write_report(
        args.common.report.as_deref(),
        &json!({
            "config": to_json(&cfg)?,
            "alpha1": alpha1.name,
            "alpha2": alpha2.name,
            "artifacts": to_json(&artifacts)?,
        }),
    )?;
    Ok(0)
}

fn beta_from_file(path: &Path, tol: &Tolerances) -> Result<Arc<PiecewiseFn>, Failure> {
    let defs = load(path, tol)?;
    let spec = match defs.get("beta") {
        Some(spec) => spec,
        None if defs.len() == 1 => &defs.specs()[0],
        None => {
            return Err(Failure::Usage(format!(
                "{} must define `beta` or exactly one function",
                path.display()
            )))
        }
    };
    Ok(spec.function.clone())
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let lemma = &args.lemma;
    let Loaded { defs, cfg } = load_lemma(lemma)?;
    let alpha1 = lookup(&defs, &lemma.alpha1, &lemma.common.input)?;
    let alpha2 = lookup(&defs, &lemma.alpha2, &lemma.common.input)?;
    let overrides = LemmaOverrides {
        majorant: majorant_of(lemma, &defs)?,
        beta: args
            .beta_from_file
            .as_deref()
            .map(|p| beta_from_file(p, &cfg.tolerances))
            .transpose()?,
        bands: None,
    };
    let report = certify_lemma(alpha1, alpha2, &cfg, &overrides)?;
    if let Some(path) = &lemma.csv {
        let beta = overrides
            .beta
            .clone()
            .or_else(|| report.construction.as_ref().map(|c| c.beta.clone()));
        if let Some(beta) = beta {
            let req = SearchRequest::new(cfg.effective_bound(), cfg.window, cfg.grid, 0);
            let samples = level0_samples(&alpha1.function, &alpha2.function, &beta, &req)?;
            write_csv(path, "x1,x2,gap", samples.into_iter().map(|p| vec![p.x1, p.x2, p.gap]))?;
        }
    }
    write_report(lemma.common.report.as_deref(), &to_json(&report)?)?;
    Ok(match report.verdict {
        LemmaVerdict::Certified => 0,
        LemmaVerdict::HypothesisFailed | LemmaVerdict::Counterexample => 1,
        LemmaVerdict::Inconclusive => 2,
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("KB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("kbound: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
