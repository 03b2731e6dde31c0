//! Two-sample exponential empirical likelihood.
//!
//! Sample weights are exponential tilts `p₁ᵢ ∝ exp(λᵀxᵢ)` and
//! `p₂ᵢ ∝ exp(−(n₁/n₂)λᵀyᵢ)`; `λ` is chosen so that both tilted means agree.
//! That makes `λ` the minimiser of the convex potential
//!
//! ```text
//! φ(λ) = log Σ exp(λᵀxᵢ) + (n₂/n₁) log Σ exp(−(n₁/n₂)λᵀyᵢ)
//! ```
//!
//! whose gradient is the difference of the tilted means and whose Hessian is
//! `Cov₁ + (n₁/n₂) Cov₂`, so Newton with backtracking converges whenever the
//! two hulls overlap. The common mean never has to be estimated separately.
//!
//! With unequal sample sizes this constraint is only first-order accurate;
//! prefer the bootstrap calibration there.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::compositional::EuclideanSample;
use crate::distributions::RngStream;
use crate::procedure::{CalibrationKind, HullStatus, SolverReport};
use crate::{Error, Result};

const MAX_ITER: usize = 200;
const RESTARTS: u64 = 5;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EelWeights {
    /// Tilt of the first sample; the second uses `−(n₁/n₂)λ`.
    pub lambda: Vec<f64>,
    pub weights1: Vec<f64>,
    pub weights2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EelSolution {
    pub weights: EelWeights,
    /// The common tilted mean.
    pub implied_mu: Vec<f64>,
    pub iterations: usize,
    /// Max-norm difference between the two tilted means.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EelResult {
    pub statistic: f64,
    pub implied_mu: Vec<f64>,
    pub p_value: f64,
    pub calibration: CalibrationKind,
    pub solver_report: SolverReport,
}

struct Tilt {
    log_norm: f64,
    probs: DVector<f64>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

// Tilted distribution of the rows of `x` with exponent `x θ`.
fn tilt(x: &DMatrix<f64>, theta: &DVector<f64>) -> Tilt {
    let e = x * theta;
    let max = e.max();
    let mut probs = e.map(|v| (v - max).exp());
    let total = probs.sum();
    probs /= total;
    let mean = x.tr_mul(&probs);
    let d = x.ncols();
    let mut cov = DMatrix::zeros(d, d);
    for (i, row) in x.row_iter().enumerate() {
        let r = row.transpose() - &mean;
        cov.ger(probs[i], &r, &r, 1.0);
    }
    Tilt {
        log_norm: max + total.ln(),
        probs,
        mean,
        cov,
    }
}

struct Problem {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    ratio: f64,
    center: DVector<f64>,
}

impl Problem {
    fn new(s1: &EuclideanSample, s2: &EuclideanSample) -> Self {
        let (n1, n2) = (s1.len() as f64, s2.len() as f64);
        // Tilts are translation invariant; centring keeps exponents small.
        let center = (s1.mean() * n1 + s2.mean() * n2) / (n1 + n2);
        let shift = |m: &DMatrix<f64>| {
            let mut out = m.clone();
            for mut row in out.row_iter_mut() {
                row -= center.transpose();
            }
            out
        };
        Self {
            x: shift(s1.matrix()),
            y: shift(s2.matrix()),
            ratio: n1 / n2,
            center,
        }
    }

    fn eval(&self, lambda: &DVector<f64>) -> (f64, Tilt, Tilt) {
        let t1 = tilt(&self.x, lambda);
        let t2 = tilt(&self.y, &(lambda * -self.ratio));
        let phi = t1.log_norm + t2.log_norm / self.ratio;
        (phi, t1, t2)
    }

    fn newton(&self, start: DVector<f64>) -> Option<(DVector<f64>, Tilt, Tilt, usize, f64)> {
        let mut lambda = start;
        let (mut phi, mut t1, mut t2) = self.eval(&lambda);
        for iter in 0..MAX_ITER {
            let grad = &t1.mean - &t2.mean;
            let hess = &t1.cov + &t2.cov * self.ratio;
            let chol = hess.cholesky()?;
            let step = -chol.solve(&grad);
            let decrement = -grad.dot(&step);
            let residual = grad.amax();
            if decrement <= 1e-24 || (decrement <= 1e-18 && residual <= RESIDUAL_TOL) {
                return (residual <= RESIDUAL_TOL).then_some((lambda, t1, t2, iter, residual));
            }
            let mut s = 1.0;
            loop {
                let cand = &lambda + &step * s;
                let (p, a, b) = self.eval(&cand);
                if p.is_finite() && p <= phi - 1e-4 * s * decrement {
                    lambda = cand;
                    phi = p;
                    t1 = a;
                    t2 = b;
                    break;
                }
                s *= 0.5;
                if s < 1e-14 {
                    return (residual <= RESIDUAL_TOL).then_some((lambda, t1, t2, iter, residual));
                }
            }
            if !lambda.iter().all(|v| v.is_finite()) {
                return None;
            }
        }
        None
    }
}

/// Solves for the tilt `λ` equating the two tilted means.
pub fn eel_solve_lambda(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<EelSolution> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    let d = s1.dim();
    for s in [s1, s2] {
        if s.len() <= d {
            return Err(Error::InsufficientData {
                needed: d + 1,
                have: s.len(),
            });
        }
    }
    let problem = Problem::new(s1, s2);
    let mut found = problem.newton(DVector::zeros(d));
    if found.is_none() {
        // Restarts scaled by the inverse pooled covariance, the natural
        // scale of λ.
        let pooled =
            (&problem.x.tr_mul(&problem.x) + &problem.y.tr_mul(&problem.y)) / (s1.len() + s2.len()) as f64;
        if let Some(inv) = pooled.try_inverse() {
            for k in 0..RESTARTS {
                let mut rng = RngStream::new(0xEE1, k).rng();
                let z = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                found = problem.newton(&inv * z);
                if found.is_some() {
                    break;
                }
            }
        }
    }
    let Some((lambda, t1, t2, iterations, residual)) = found else {
        if !crate::el::hulls_intersect(s1, s2) {
            return Err(Error::EmptyHullIntersection);
        }
        return Err(Error::NonConvergence {
            iterations: MAX_ITER * (RESTARTS as usize + 1),
            residual: f64::NAN,
        });
    };
    let implied = (&t1.mean + &t2.mean) * 0.5 + &problem.center;
    Ok(EelSolution {
        weights: EelWeights {
            lambda: lambda.iter().copied().collect(),
            weights1: t1.probs.iter().copied().collect(),
            weights2: t2.probs.iter().copied().collect(),
        },
        implied_mu: implied.iter().copied().collect(),
        iterations,
        residual,
    })
}

/// `2 [n₁ Σ p₁ᵢ log(n₁p₁ᵢ) + n₂ Σ p₂ᵢ log(n₂p₂ᵢ)]`.
pub fn eel_statistic(weights: &EelWeights) -> f64 {
    let kl = |p: &[f64]| {
        let n = p.len() as f64;
        n * p
            .iter()
            .filter(|&&pi| pi > 0.0)
            .map(|pi| pi * (n * pi).ln())
            .sum::<f64>()
    };
    (2.0 * (kl(&weights.weights1) + kl(&weights.weights2))).max(0.0)
}

/// The two-sample statistic only; used by the bootstrap.
pub fn eel_two_sample_statistic(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<f64> {
    eel_solve_lambda(s1, s2).map(|s| eel_statistic(&s.weights))
}

pub fn eel_two_sample(
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    calibration: &crate::procedure::Calibration,
) -> Result<EelResult> {
    let sol = eel_solve_lambda(s1, s2)?;
    let statistic = eel_statistic(&sol.weights);
    let p_value =
        crate::procedure::calibrated_pvalue(statistic, calibration, s1, s2, &eel_two_sample_statistic)?;
    Ok(EelResult {
        statistic,
        implied_mu: sol.implied_mu,
        p_value,
        calibration: calibration.kind(),
        solver_report: SolverReport {
            outer_iterations: sol.iterations,
            inner_iterations: 0,
            converged: true,
            hull_status: HullStatus::Inside,
            residual: sol.residual,
            lambda_balance: None,
            verified_minimum: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(values: &[f64]) -> EuclideanSample {
        EuclideanSample::from_rows(&values.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap()
    }

    fn tilted_mean(x: &[f64], t: f64) -> f64 {
        let w: Vec<f64> = x.iter().map(|v| (t * v).exp()).collect();
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>()
    }

    #[test]
    fn equal_means_give_zero_tilt() {
        let a = col(&[0.0, 1.0, 2.0]);
        let b = col(&[0.5, 1.0, 1.5, 1.0]);
        let sol = eel_solve_lambda(&a, &b).unwrap();
        assert!(sol.weights.lambda[0].abs() < 1e-12);
        assert!(sol.weights.weights1.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12));
        assert_abs_diff_eq!(sol.implied_mu[0], 1.0, epsilon = 1e-12);
        assert!(eel_statistic(&sol.weights) < 1e-20);
    }

    #[test]
    fn scalar_tilt_matches_bisection() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        let r = |l: f64| tilted_mean(&x, l) - tilted_mean(&y, -l);
        let (mut lo, mut hi) = (-50.0, 50.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if r(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sol = eel_solve_lambda(&col(&x), &col(&y)).unwrap();
        assert_abs_diff_eq!(sol.weights.lambda[0], 0.5 * (lo + hi), epsilon = 1e-8);
        assert_abs_diff_eq!(sol.implied_mu[0], 1.5, epsilon = 1e-8);
    }

    #[test]
    fn swapping_samples_rescales_lambda() {
        let a = EuclideanSample::from_rows(&[
            vec![0.1, 0.2],
            vec![0.4, -0.1],
            vec![-0.3, 0.3],
            vec![0.2, 0.6],
            vec![0.0, -0.4],
        ])
        .unwrap();
        let b = EuclideanSample::from_rows(&[
            vec![0.3, 0.1],
            vec![0.5, 0.3],
            vec![-0.1, 0.0],
            vec![0.6, -0.2],
            vec![0.2, 0.4],
            vec![0.1, 0.1],
            vec![0.4, 0.5],
        ])
        .unwrap();
        let ab = eel_solve_lambda(&a, &b).unwrap();
        let ba = eel_solve_lambda(&b, &a).unwrap();
        let ratio = a.len() as f64 / b.len() as f64;
        for k in 0..2 {
            assert_abs_diff_eq!(
                ba.weights.lambda[k],
                -ratio * ab.weights.lambda[k],
                epsilon = 1e-8
            );
            assert_abs_diff_eq!(ba.implied_mu[k], ab.implied_mu[k], epsilon = 1e-8);
        }
        assert_abs_diff_eq!(
            eel_statistic(&ab.weights),
            eel_statistic(&ba.weights),
            epsilon = 1e-10
        );
    }

    #[test]
    fn disjoint_samples_fail_cleanly() {
        let a = col(&[0.0, 0.1, 0.2]);
        let b = col(&[1.0, 1.1, 1.2]);
        assert!(matches!(
            eel_solve_lambda(&a, &b),
            Err(Error::EmptyHullIntersection)
        ));
    }
}
