//! Reads two CSV files of compositions and runs every procedure on them.
//!
//! `cargo run --example csv_test -- first.csv second.csv`; without arguments
//! a pair of demonstration files is written to the temp directory.

use std::path::PathBuf;

use simplex_means::bootstrap::BootstrapConfig;
use simplex_means::compositional::{helmert_transform, CompositionalSample, DEFAULT_TOLERANCE};
use simplex_means::distributions::RngStream;
use simplex_means::procedure::{run_test, Calibration, CalibrationKind, TestKind};
use simplex_means::simulation::{scenario_populations, Scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let (f1, f2) = match args.as_slice() {
        [a, b] => (a.clone(), b.clone()),
        _ => demo_files()?,
    };
    let x1 = CompositionalSample::read_csv(&f1, DEFAULT_TOLERANCE)?;
    let x2 = CompositionalSample::read_csv(&f2, DEFAULT_TOLERANCE)?;
    println!(
        "{}: {} x {}, {}: {} x {}",
        f1.display(),
        x1.len(),
        x1.parts(),
        f2.display(),
        x2.len(),
        x2.parts()
    );
    let (y1, y2) = (helmert_transform(&x1), helmert_transform(&x2));

    let boot = BootstrapConfig::new(299, 0);
    for test in TestKind::ALL {
        for kind in [
            CalibrationKind::F,
            CalibrationKind::Chi2,
            CalibrationKind::CorrectedChi2,
            CalibrationKind::Bootstrap,
        ] {
            if !test.supports(kind) {
                continue;
            }
            match run_test(test, &Calibration::from_kind(kind, &boot), &y1, &y2) {
                Ok(r) => println!(
                    "{:<24} statistic = {:9.4}  p = {:.4}",
                    r.procedure().label(),
                    r.statistic,
                    r.p_value
                ),
                Err(e) => println!("{:<24} {e}", format!("{}({})", test.name(), kind.name())),
            }
        }
    }
    Ok(())
}

fn demo_files() -> Result<(PathBuf, PathBuf), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::new(Scenario::Two, 20, 20).with_delta(0.12);
    let (p1, p2) = scenario_populations(&cfg)?;
    let dir = std::env::temp_dir();
    let mut paths = Vec::new();
    for (k, p) in [p1, p2].iter().enumerate() {
        let x = p.sample(20, &mut RngStream::new(11, k as u64).rng())?;
        let path = dir.join(format!("simplex-means-demo-{}.csv", k + 1));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["x1", "x2", "x3", "x4"])?;
        for row in x.matrix().row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:.10}")))?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok((paths[0].clone(), paths[1].clone()))
}
