use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use simplex_means::bootstrap::BootstrapConfig;
use simplex_means::compositional::{helmert_transform, CompositionalSample, DEFAULT_TOLERANCE};
use simplex_means::procedure::{run_test, Calibration, CalibrationKind, Procedure, TestKind, TestResult};
use simplex_means::simulation::{
    default_delta_grid, run_power_study, run_type1_study, Scenario, ScenarioConfig, StudyOptions,
    StudyReport, DEFAULT_REPS, NOMINAL_ALPHA,
};
use simplex_means::Error;

const HEAVY_DEFAULT_REPS: usize = 200;

#[derive(Parser)]
#[command(
    name = "simplex-means",
    version,
    about = "Two-sample mean tests for compositional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test equality of means of two CSV files of compositions.
    Test(TestArgs),
    /// Estimate Type I error on a canned scenario.
    Simulate(StudyArgs),
    /// Estimate power along a grid of mean shifts.
    Power(PowerArgs),
}

#[derive(Args)]
struct Common {
    /// Procedures as `test` or `test:calibration`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "hotelling,james,el,eel")]
    tests: Vec<String>,
    /// Calibration for entries of --tests without one.
    #[arg(long, default_value = "f")]
    calibration: String,
    /// Bootstrap replicates.
    #[arg(short = 'B', long = "bootstrap", default_value_t = 299)]
    b: usize,
    #[arg(long, env = "SIMPLEX_MEANS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = NOMINAL_ALPHA)]
    alpha: f64,
    /// Worker cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TestArgs {
    file1: PathBuf,
    file2: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    scenario: u8,
    /// Size of both samples.
    #[arg(long, required_unless_present_all = ["n1", "n2"])]
    n: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    /// Monte Carlo replicates (1000, or 200 with --heavy).
    #[arg(long)]
    reps: Option<usize>,
    /// Allow EL and EEL with bootstrap calibration.
    #[arg(long)]
    heavy: bool,
    #[command(flatten)]
    common: Common,
    /// Write the CSV report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// `default` or comma-separated shifts.
    #[arg(long, default_value = "default", allow_hyphen_values = true)]
    delta_grid: String,
    /// Directory for per-procedure `delta,estimate` files.
    #[arg(long)]
    series_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => Failure::Usage(m),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn procedures(c: &Common) -> Result<Vec<Procedure>, Failure> {
    let default: CalibrationKind = c.calibration.parse()?;
    let mut out = Vec::new();
    for spec in c.tests.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let p = if spec.contains(':') {
            spec.parse()?
        } else {
            Procedure::new(spec.parse()?, default)?
        };
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("--tests selects nothing".into()));
    }
    Ok(out)
}

fn check_common(c: &Common) -> Result<(), Failure> {
    if !(c.alpha > 0.0 && c.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha {} must lie in (0, 1)", c.alpha)));
    }
    if c.b == 0 {
        return Err(Failure::Usage("-B must be positive".into()));
    }
    if c.threads == Some(0) {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))
}

#[derive(Serialize)]
struct TestRow<'a> {
    label: String,
    reject: bool,
    #[serde(flatten)]
    result: &'a TestResult,
}

fn cmd_test(a: &TestArgs) -> Result<(), Failure> {
    check_common(&a.common)?;
    let procs = procedures(&a.common)?;
    let x1 = CompositionalSample::read_csv(&a.file1, DEFAULT_TOLERANCE)?;
    let x2 = CompositionalSample::read_csv(&a.file2, DEFAULT_TOLERANCE)?;
    if x1.parts() != x2.parts() {
        return Err(Failure::Run(format!(
            "{} has {} parts but {} has {}",
            a.file1.display(),
            x1.parts(),
            a.file2.display(),
            x2.parts()
        )));
    }
    let (y1, y2) = (helmert_transform(&x1), helmert_transform(&x2));
    let boot = BootstrapConfig {
        max_parallelism: a.common.threads,
        ..BootstrapConfig::new(a.common.b, a.common.seed)
    };
    let mut results = Vec::new();
    for p in &procs {
        let res =
            run_test(p.test, &Calibration::from_kind(p.calibration, &boot), &y1, &y2).map_err(
                |e| match e {
                    Error::OutsideHull { .. } | Error::EmptyHullIntersection => Failure::Run(format!(
                        "{p}: {e}; use james or a bootstrap-calibrated quadratic test instead"
                    )),
                    other => Failure::Run(format!("{p}: {other}")),
                },
            )?;
        results.push(res);
    }
    let rows: Vec<TestRow> = results
        .iter()
        .map(|r| TestRow {
            label: r.procedure().label(),
            reject: r.rejects(a.common.alpha),
            result: r,
        })
        .collect();
    let json = write_json(&rows)?;
    if let Some(path) = &a.out {
        fs::write(path, format!("{json}\n"))?;
    }
    let stdout = io::stdout();
    let mut w = stdout.lock();
    if a.common.json {
        writeln!(w, "{json}")?;
        return Ok(());
    }
    writeln!(
        w,
        "n1={} n2={} parts={} alpha={}",
        x1.len(),
        x2.len(),
        x1.parts(),
        a.common.alpha
    )?;
    for r in &rows {
        let res = r.result;
        write!(
            w,
            "{:<22} statistic={:<12.6} p={:<8.4} {}",
            r.label,
            res.statistic,
            res.p_value,
            if r.reject { "reject" } else { "retain" }
        )?;
        for (k, v) in &res.aux {
            write!(w, " {k}={v:.4}")?;
        }
        if let Some(s) = &res.solver {
            write!(
                w,
                " iterations={} residual={:.2e}",
                s.outer_iterations, s.residual
            )?;
            if let Some(b) = s.lambda_balance {
                write!(w, " balance={b:.2e}")?;
            }
        }
        if let Some(b) = &res.bootstrap {
            write!(w, " B={} failed={}", b.replicates, b.failures)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn study_setup(a: &StudyArgs) -> Result<(ScenarioConfig, Vec<Procedure>, StudyOptions), Failure> {
    check_common(&a.common)?;
    let scenario = Scenario::try_from(a.scenario)?;
    let n1 =
        a.n1.or(a.n)
            .ok_or_else(|| Failure::Usage("--n1 or --n is required".into()))?;
    let n2 =
        a.n2.or(a.n)
            .ok_or_else(|| Failure::Usage("--n2 or --n is required".into()))?;
    let procs = procedures(&a.common)?;
    let expensive = procs.iter().any(|p| {
        matches!(p.test, TestKind::El | TestKind::Eel) && p.calibration == CalibrationKind::Bootstrap
    });
    if expensive && !a.heavy {
        return Err(Failure::Usage(
            "EL and EEL with bootstrap calibration need --heavy".into(),
        ));
    }
    let reps = a
        .reps
        .unwrap_or(if a.heavy { HEAVY_DEFAULT_REPS } else { DEFAULT_REPS });
    if reps == 0 {
        return Err(Failure::Usage("--reps must be positive".into()));
    }
    let opts = StudyOptions {
        reps,
        alpha: a.common.alpha,
        bootstrap_replicates: a.common.b,
        master_seed: a.common.seed,
        threads: a.common.threads,
    };
    Ok((ScenarioConfig::new(scenario, n1, n2), procs, opts))
}

fn emit_report(report: &StudyReport, a: &StudyArgs) -> Result<(), Failure> {
    if let Some(path) = &a.out {
        report.write_csv(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &a.out_json {
        fs::write(path, format!("{}\n", report.to_json()?))?;
    }
    if a.common.json {
        println!("{}", report.to_json()?);
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}

fn cmd_simulate(a: &StudyArgs) -> Result<(), Failure> {
    let (cfg, procs, opts) = study_setup(a)?;
    let start = std::time::Instant::now();
    let report = run_type1_study(&cfg, &procs, &opts)?;
    eprintln!("completed in {:.1}s", start.elapsed().as_secs_f64());
    emit_report(&report, a)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    if s.trim() == "default" {
        return Ok(default_delta_grid());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Usage(format!("bad delta {t:?}")))
        })
        .collect()
}

fn cmd_power(a: &PowerArgs) -> Result<(), Failure> {
    let (cfg, procs, opts) = study_setup(&a.study)?;
    let grid = parse_grid(&a.delta_grid)?;
    let start = std::time::Instant::now();
    let report = run_power_study(&cfg, &procs, &grid, &opts)?;
    eprintln!("completed in {:.1}s", start.elapsed().as_secs_f64());
    if let Some(dir) = &a.series_dir {
        fs::create_dir_all(dir)?;
        for p in &procs {
            let name = format!("{}_{}.csv", p.test.name().to_lowercase(), p.calibration);
            report.write_series(&p.label(), BufWriter::new(File::create(dir.join(name))?))?;
        }
    }
    emit_report(&report, &a.study)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Power(a) => cmd_power(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
