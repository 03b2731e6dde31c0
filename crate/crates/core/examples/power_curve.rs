//! Power curve along the scenario-1 shift direction. Every shift reuses the
//! same underlying draws, so the curve is smooth at modest replicate counts.

use simplex_means::procedure::{CalibrationKind, Procedure, TestKind};
use simplex_means::simulation::{
    default_delta_grid, run_power_study, Scenario, ScenarioConfig, StudyOptions,
};

fn main() -> simplex_means::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let procs = [
        Procedure::new(TestKind::Hotelling, CalibrationKind::F)?,
        Procedure::new(TestKind::James, CalibrationKind::F)?,
        Procedure::new(TestKind::Eel, CalibrationKind::F)?,
    ];
    let mut grid = default_delta_grid();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    let opts = StudyOptions {
        reps,
        master_seed: 2,
        ..StudyOptions::default()
    };
    let report = run_power_study(&ScenarioConfig::new(Scenario::One, 30, 30), &procs, &grid, &opts)?;

    for (label, points) in report.series() {
        println!("{label}");
        for (delta, power) in points {
            println!(
                "  {delta:+.2} {power:.3} {}",
                "#".repeat((power * 50.0).round() as usize)
            );
        }
    }
    Ok(())
}
