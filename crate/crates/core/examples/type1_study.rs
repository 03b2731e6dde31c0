//! Type I error study on scenario 1 with small, unequal samples, where the
//! pooled-covariance test loses its size.
//!
//! `cargo run --release --example type1_study -- 1000` for the full run.

use simplex_means::procedure::{CalibrationKind, Procedure, TestKind};
use simplex_means::simulation::{run_type1_study, Scenario, ScenarioConfig, StudyOptions};

fn main() -> simplex_means::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let procs = [
        Procedure::new(TestKind::Hotelling, CalibrationKind::F)?,
        Procedure::new(TestKind::James, CalibrationKind::F)?,
        Procedure::new(TestKind::James, CalibrationKind::CorrectedChi2)?,
        Procedure::new(TestKind::El, CalibrationKind::Chi2)?,
        Procedure::new(TestKind::Eel, CalibrationKind::Chi2)?,
        Procedure::new(TestKind::James, CalibrationKind::Bootstrap)?,
    ];
    let opts = StudyOptions {
        reps,
        master_seed: 1,
        ..StudyOptions::default()
    };
    let report = run_type1_study(&ScenarioConfig::new(Scenario::One, 30, 50), &procs, &opts)?;
    print!("{}", report.summary());
    report.write_csv(std::io::stdout())?;
    Ok(())
}
