//! Two-sample empirical likelihood: the fitted common mean, the Lagrange
//! multipliers and the solver diagnostics.

use simplex_means::compositional::helmert_transform;
use simplex_means::distributions::RngStream;
use simplex_means::el::{el_fit, el_two_sample, hulls_intersect};
use simplex_means::procedure::Calibration;
use simplex_means::simulation::{scenario_populations, Scenario, ScenarioConfig};

fn main() -> simplex_means::Result<()> {
    let cfg = ScenarioConfig::new(Scenario::One, 30, 30).with_delta(-0.09);
    let (p1, p2) = scenario_populations(&cfg)?;
    let y1 = helmert_transform(&p1.sample(cfg.n1, &mut RngStream::new(3, 0).rng())?);
    let y2 = helmert_transform(&p2.sample(cfg.n2, &mut RngStream::new(3, 1).rng())?);
    assert!(hulls_intersect(&y1, &y2));

    let fit = el_fit(&y1, &y2)?;
    println!("EL statistic     {:.6}", fit.statistic);
    println!("common mean      {:.5}", fit.mu_hat.transpose());
    println!("lambda 1         {:.5}", fit.lambdas.0.transpose());
    println!("lambda 2         {:.5}", fit.lambdas.1.transpose());
    println!(
        "n1 l1 + n2 l2    {:.2e}",
        fit.report.lambda_balance.unwrap_or(f64::NAN)
    );
    println!("outer iterations {}", fit.report.outer_iterations);

    for cal in [Calibration::Chi2, Calibration::F, Calibration::CorrectedChi2] {
        let r = el_two_sample(&y1, &y2, &cal)?;
        println!("EL({:<14}) p = {:.4}", cal.kind(), r.p_value);
    }
    Ok(())
}
