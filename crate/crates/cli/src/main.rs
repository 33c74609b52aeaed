use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use levycalc::classify::{classify_order, ClassReport, DEFAULT_PER_DECADE, MAX_ORDER_CAP};
use levycalc::doc::{parse_triple, render};
use levycalc::exponent::{exponent, exponent_transform, kernel_cf, LevyExponent};
use levycalc::hyperbolic::{bdlp_cf, d_log_psi, d_log_psi_c_closed, psi_c, psi_s, psi_s_verdict, Match, Psi, ScalarCf, VerdictTable, VERDICT_POINTS};
use levycalc::simulate::{compare_cf, empirical_cf, linear_grid, sample_integral_exact, EmpiricalCF};
use levycalc::transform::{i_transform, j_alpha};
use levycalc::triple::{LevyTriple, RadiusGrid};
use levycalc::verify::{run_suite, Suite, VerifyOptions};
use levycalc::LevyError;

/// Lévy triples under random-integral mappings.
///
/// Quadrature tolerance defaults to 1e-10 absolute and can be overridden with
/// the LEVYCALC_TOL environment variable.
#[derive(Parser)]
#[command(name = "levycalc", version)]
struct Cli {
    /// Omit the `#` provenance line on emitted documents and tables.
    #[arg(long, global = true)]
    no_header: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply 𝒥^α (or ℐ with --i-map) to a triple document.
    Transform {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, conflicts_with = "alpha")]
        i_map: bool,
    },
    /// Tabulate the exponent of the 𝒥^α image.
    Cf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        ymin: f64,
        #[arg(long, allow_negative_numbers = true)]
        ymax: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        points: u32,
        #[arg(long, value_enum, default_value_t = Method::Triple)]
        method: Method,
    },
    /// Largest verified order k with the triple in 𝒰^{<k>}.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=MAX_ORDER_CAP as i64))]
        max_order: u32,
        /// Radius grid points per decade.
        #[arg(long, default_value_t = DEFAULT_PER_DECADE as u32, value_parser = clap::value_parser!(u32).range(3..))]
        grid_points: u32,
    },
    /// Exact draws of ∫ t dY(τ_α(t)) for a discrete seed.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Sample file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary document (batch metadata and empirical CF); stderr when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 41, value_parser = clap::value_parser!(u32).range(1..))]
        cf_points: u32,
        #[arg(long, default_value_t = 5.0)]
        cf_ymax: f64,
    },
    /// Run self-check suites; exit 0 only if every line passes.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1_000_000)]
        mc_samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The t/sinh t and 1/cosh t examples: BDLP check and the ψ_S verdict table.
    Hyperbolic {
        #[arg(long, default_value_t = 0.5)]
        tmin: f64,
        #[arg(long, default_value_t = 5.0)]
        tmax: f64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        points: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Triple,
    Quadrature,
    Kernel,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Special,
    Transform,
    Inverse,
    Mc,
    Hyperbolic,
    Classify,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Special => Suite::Special,
            SuiteArg::Transform => Suite::Transform,
            SuiteArg::Inverse => Suite::Inverse,
            SuiteArg::Mc => Suite::Mc,
            SuiteArg::Hyperbolic => Suite::Hyperbolic,
            SuiteArg::Classify => Suite::Classify,
            SuiteArg::All => Suite::All,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<LevyError> for Failure {
    fn from(e: LevyError) -> Self {
        let code = match e {
            LevyError::Document(_) => 2,
            LevyError::InvalidParameter(_)
            | LevyError::InvalidMeasure(_)
            | LevyError::NonFinite(_)
            | LevyError::LogMomentDiverges(_)
            | LevyError::UnsupportedSeed(_) => 3,
            LevyError::QuadratureFailure { .. } | LevyError::DifferentiationUnstable { .. } | LevyError::GridTooCoarse { .. } => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

struct Emitter {
    header: Option<String>,
}

impl Emitter {
    fn new(no_header: bool, what: &str) -> Self {
        let header = (!no_header).then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            format!("# levycalc {} {what} (unix time {secs})\n", env!("CARGO_PKG_VERSION"))
        });
        Emitter { header }
    }

    fn text(&self, body: &str) -> String {
        format!("{}{body}", self.header.as_deref().unwrap_or(""))
    }

    fn write(&self, path: Option<&Path>, body: &str) -> Outcome {
        let text = self.text(body);
        match path {
            Some(p) => fs::write(p, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn read_triple(path: &Path) -> Result<LevyTriple, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_triple(&text)?)
}

/// Full validation; the error names the failing check.
fn validated(path: &Path) -> Result<LevyTriple, Failure> {
    let t = read_triple(path)?;
    t.validate().map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("validation failed: {}", f.message);
        f
    })?;
    Ok(t)
}

fn cmd_transform(input: &Path, alpha: f64, out: Option<&Path>, i_map: bool, em: &Emitter) -> Outcome {
    let t = validated(input)?;
    let image = if i_map { i_transform(&t)? } else { j_alpha(&t, alpha)? };
    em.write(out, &render(&image))
}

fn engine(t: &LevyTriple, alpha: f64, method: Method) -> Result<LevyExponent, Failure> {
    Ok(match method {
        Method::Triple => exponent(&j_alpha(t, alpha)?)?,
        Method::Quadrature => exponent_transform(&exponent(t)?, alpha)?,
        Method::Kernel => {
            if alpha.fract() != 0.0 || alpha < 1.0 {
                return Err(Failure { code: 3, message: format!("the kernel method needs a positive integer alpha, got {alpha}") });
            }
            kernel_cf(t, alpha as u32)?
        }
        Method::All => unreachable!("expanded by the caller"),
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Triple => "triple",
        Method::Quadrature => "quadrature",
        Method::Kernel => "kernel",
        Method::All => "all",
    }
}

fn cmd_cf(input: &Path, alpha: f64, ymin: f64, ymax: f64, points: u32, method: Method, em: &Emitter) -> Outcome {
    if !(ymin.is_finite() && ymax.is_finite() && ymin <= ymax) {
        return Err(Failure::usage(format!("need finite ymin <= ymax, got {ymin}, {ymax}")));
    }
    let t = read_triple(input)?;
    let ys = if points == 1 { vec![ymin] } else { linear_grid(ymin, ymax, points as usize) };
    let methods: Vec<Method> =
        if method == Method::All { vec![Method::Triple, Method::Quadrature, Method::Kernel] } else { vec![method] };

    let mut body = String::new();
    let mut columns = Vec::new();
    for m in methods {
        let phi = match engine(&t, alpha, m) {
            Ok(phi) => phi,
            Err(f) if method == Method::All && f.code == 3 => {
                body.push_str(&format!("# method {} skipped: {}\n", method_name(m), f.message));
                continue;
            }
            Err(f) => return Err(f),
        };
        let values = ys.iter().map(|&y| phi.eval(y)).collect::<Result<Vec<_>, _>>()?;
        body.push_str(&format!("# method {}\ny,re,im\n", method_name(m)));
        for (y, v) in ys.iter().zip(&values) {
            body.push_str(&format!("{y},{},{}\n", v.re, v.im));
        }
        columns.push(values);
    }
    if method == Method::All {
        let mut worst = 0.0f64;
        for (i, a) in columns.iter().enumerate() {
            for b in &columns[i + 1..] {
                worst = a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(worst, f64::max);
            }
        }
        body.push_str(&format!("# max pairwise deviation {worst:e}\n"));
    }
    em.write(None, &body)
}

fn cmd_classify(input: &Path, max_order: u32, grid_points: u32, em: &Emitter) -> Outcome {
    let t = validated(input)?;
    let grid = RadiusGrid::for_measure(&t.measure.simplified(), grid_points as usize);
    let report: ClassReport = classify_order(&t, max_order, &grid)?;
    eprintln!("order {}", report.order);
    em.write(None, &render(&report))
}

#[derive(Serialize)]
struct SimulationSummary {
    seed_spec: LevyTriple,
    alpha: f64,
    rng_seed: u64,
    n: usize,
    empirical_cf: EmpiricalCF,
    /// Fraction of grid points within 3 standard errors of the analytic CF.
    within_3se: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    input: &Path,
    alpha: f64,
    samples: u64,
    seed: u64,
    format: Format,
    out: Option<&Path>,
    summary: Option<&Path>,
    cf_points: u32,
    cf_ymax: f64,
    em: &Emitter,
) -> Outcome {
    let t = validated(input)?;
    let n = samples as usize;
    let batch = sample_integral_exact(&t, alpha, n, seed)?;
    match format {
        Format::Csv => {
            let mut body = String::with_capacity(n * 24);
            for v in &batch.values {
                body.push_str(&format!("{v}\n"));
            }
            em.write(out, &body)?;
        }
        Format::Bin => {
            let bytes: Vec<u8> = batch.values.iter().flat_map(|v| v.to_le_bytes()).collect();
            match out {
                Some(p) => fs::write(p, bytes)?,
                None => io::stdout().lock().write_all(&bytes)?,
            }
        }
    }
    let ys = if cf_points == 1 { vec![0.0] } else { linear_grid(-cf_ymax, cf_ymax, cf_points as usize) };
    let emp = empirical_cf(&batch, &ys)?;
    let cmp = compare_cf(&emp, &exponent(&j_alpha(&t, alpha)?)?, 3.0, n)?;
    let doc = SimulationSummary { seed_spec: t, alpha, rng_seed: seed, n, empirical_cf: emp, within_3se: cmp.fraction_within() };
    let text = em.text(&render(&doc));
    match summary {
        Some(p) => fs::write(p, text)?,
        None => eprint!("{text}"),
    }
    Ok(())
}

fn cmd_verify(suite: SuiteArg, mc_samples: usize, seed: Option<u64>) -> Outcome {
    let mut opts = VerifyOptions { mc_samples, ..VerifyOptions::default() };
    if let Some(s) = seed {
        opts.seed = s;
    }
    let lines = run_suite(suite.into(), &opts);
    let stdout = io::stdout();
    let mut w = stdout.lock();
    for l in &lines {
        writeln!(w, "{l}")?;
    }
    match lines.iter().find(|l| !l.passed) {
        Some(l) => Err(Failure { code: 3, message: format!("first failing check: {}", l.name) }),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct HyperbolicRow {
    t: f64,
    psi_s: f64,
    psi_c: f64,
    bdlp_sinh: f64,
    bdlp_cosh: f64,
    d_log_psi_c: f64,
    d_log_psi_c_closed: f64,
}

#[derive(Serialize)]
struct HyperbolicDoc {
    rows: Vec<HyperbolicRow>,
    psi_s_verdict: VerdictTable,
}

fn cmd_hyperbolic(tmin: f64, tmax: f64, points: u32, em: &Emitter) -> Outcome {
    if !(tmin.is_finite() && tmax.is_finite() && tmin <= tmax) {
        return Err(Failure::usage(format!("need finite tmin <= tmax, got {tmin}, {tmax}")));
    }
    let ts = if points == 1 { vec![tmin] } else { linear_grid(tmin, tmax, points as usize) };
    let rows = ts
        .into_iter()
        .map(|t| {
            Ok(HyperbolicRow {
                t,
                psi_s: psi_s(t),
                psi_c: psi_c(t),
                bdlp_sinh: bdlp_cf(&ScalarCf::SINH, t)?,
                bdlp_cosh: bdlp_cf(&ScalarCf::COSH, t)?,
                d_log_psi_c: d_log_psi(Psi::Cosh, t)?,
                d_log_psi_c_closed: d_log_psi_c_closed(t),
            })
        })
        .collect::<Result<Vec<_>, LevyError>>()?;
    let verdict = psi_s_verdict(&VERDICT_POINTS, 1e-6)?;
    match verdict.matches {
        Match::CandidateA => eprintln!("psi_S derivative matches {}", verdict.candidate_a),
        Match::CandidateB => eprintln!("psi_S derivative matches {}", verdict.candidate_b),
        Match::Both => eprintln!("psi_S derivative matches both candidates"),
        Match::Neither => eprintln!("psi_S derivative matches neither candidate"),
    }
    let doc = HyperbolicDoc { rows, psi_s_verdict: verdict };
    em.write(None, &render(&doc))
}

fn run(cli: Cli) -> Outcome {
    let no_header = cli.no_header;
    match cli.command {
        Command::Transform { input, alpha, out, i_map } => {
            cmd_transform(&input, alpha, out.as_deref(), i_map, &Emitter::new(no_header, "transform"))
        }
        Command::Cf { input, alpha, ymin, ymax, points, method } => {
            cmd_cf(&input, alpha, ymin, ymax, points, method, &Emitter::new(no_header, "cf"))
        }
        Command::Classify { input, max_order, grid_points } => {
            cmd_classify(&input, max_order, grid_points, &Emitter::new(no_header, "classify"))
        }
        Command::Simulate { input, alpha, samples, seed, format, out, summary, threads, cf_points, cf_ymax } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Failure::usage(format!("cannot start {n} threads: {e}")))?;
            }
            let em = Emitter::new(no_header, "simulate");
            cmd_simulate(&input, alpha, samples, seed, format, out.as_deref(), summary.as_deref(), cf_points, cf_ymax, &em)
        }
        Command::Verify { suite, mc_samples, seed } => cmd_verify(suite, mc_samples, seed),
        Command::Hyperbolic { tmin, tmax, points } => cmd_hyperbolic(tmin, tmax, points, &Emitter::new(no_header, "hyperbolic")),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("levycalc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
