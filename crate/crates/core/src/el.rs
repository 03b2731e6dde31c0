//! Two-sample empirical likelihood.
//!
//! For a candidate common mean `μ` each sample contributes the one-sample
//! log-likelihood ratio `2 Σᵢ log(1 + λⱼᵀ(xⱼᵢ − μ))`, where `λⱼ` solves
//! `Σᵢ (xⱼᵢ − μ)/(1 + λⱼᵀ(xⱼᵢ − μ)) = 0`. The statistic is the minimum of the
//! sum over `μ`. The one-sample dual is concave in `λ` and is maximised by
//! damped Newton; the outer problem uses Newton with the exact envelope
//! gradient `−2(n₁λ₁ + n₂λ₂)` and the implicit-function Hessian.
//!
//! The factor 2 makes the statistic asymptotically χ²_d under the null.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::compositional::EuclideanSample;
use crate::linalg::symmetrize;
use crate::procedure::{CalibrationKind, HullStatus, SolverReport};
use crate::{Error, Result};

/// Lower bound on `1 + λᵀ(x − μ)`, as a multiple of `1/n`.
const POSITIVITY_FLOOR: f64 = 1e-10;
const MAX_INNER: usize = 200;
/// Newton decrement per observation below which a solve has converged;
/// the objective is a sum of `n` logarithms, so round-off scales with `n`.
const DECREMENT_TOL: f64 = 1e-15;
const DIVERGENCE_SCALE: f64 = 1e10;

/// Empirical likelihood weights of one sample at a candidate mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElWeights {
    pub lambda: Vec<f64>,
    pub weights: Vec<f64>,
    pub mu: Vec<f64>,
}

/// One-sample solution: weights plus the partial statistic.
#[derive(Debug, Clone)]
pub struct ElOneSample {
    pub weights: ElWeights,
    /// `2 Σ log(1 + λᵀ(xᵢ − μ)) = −2 Σ log(n pᵢ)`.
    pub statistic: f64,
    pub iterations: usize,
    // Σ wᵢ² zᵢ zᵢᵀ and Σ wᵢ² zᵢ at the solution, for the outer Hessian.
    jac: DMatrix<f64>,
    cross: DVector<f64>,
    lambda: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElResult {
    pub statistic: f64,
    pub mu_hat: Vec<f64>,
    pub lambdas: (Vec<f64>, Vec<f64>),
    pub p_value: f64,
    pub calibration: CalibrationKind,
    pub solver_report: SolverReport,
}

fn centered(sample: &EuclideanSample, mu: &DVector<f64>) -> DMatrix<f64> {
    let mut z = sample.matrix().clone();
    for mut row in z.row_iter_mut() {
        row -= mu.transpose();
    }
    z
}

fn dual_objective(z: &DMatrix<f64>, lambda: &DVector<f64>, floor: f64) -> Option<f64> {
    let t = z * lambda;
    let mut obj = 0.0;
    for ti in t.iter() {
        let v = 1.0 + ti;
        if v.is_nan() || v < floor {
            return None;
        }
        obj += v.ln();
    }
    Some(obj)
}

/// Solves the one-sample dual at `mu`.
///
/// Fails with [`Error::OutsideHull`] (sample index 1) when `mu` is not in
/// the interior of the convex hull of the rows.
pub fn el_one_sample(sample: &EuclideanSample, mu: &[f64]) -> Result<ElOneSample> {
    let mu = DVector::from_column_slice(mu);
    one_sample(sample, &mu, 1)
}

fn one_sample(sample: &EuclideanSample, mu: &DVector<f64>, index: usize) -> Result<ElOneSample> {
    solve_dual(sample, mu).map_err(|f| match f {
        DualFailure::Invalid(e) => e,
        DualFailure::Stalled(z, iterations, residual) => classify_failure(&z, index, iterations, residual),
    })
}

enum DualFailure {
    Invalid(Error),
    Stalled(DMatrix<f64>, usize, f64),
}

// Failures carry what the hull diagnosis needs, so callers that only probe
// feasibility can skip it.
fn solve_dual(sample: &EuclideanSample, mu: &DVector<f64>) -> std::result::Result<ElOneSample, DualFailure> {
    let d = sample.dim();
    if mu.len() != d {
        return Err(DualFailure::Invalid(Error::DimensionMismatch {
            expected: d,
            found: mu.len(),
        }));
    }
    let n = sample.len();
    if n <= d {
        return Err(DualFailure::Invalid(Error::InsufficientData {
            needed: d + 1,
            have: n,
        }));
    }
    let z = centered(sample, mu);
    let zmax = z.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let floor = POSITIVITY_FLOOR / n as f64;
    let mut lambda = DVector::<f64>::zeros(d);
    let mut obj = 0.0_f64;
    let mut polished = false;

    for iter in 0..MAX_INNER {
        let t = &z * &lambda;
        let w = t.map(|ti| 1.0 / (1.0 + ti));
        let grad = z.tr_mul(&w);
        let zw = DMatrix::from_fn(n, d, |i, k| z[(i, k)] * w[i]);
        let jac = zw.tr_mul(&zw);
        let Some(chol) = jac.clone().cholesky() else {
            return Err(DualFailure::Invalid(Error::SingularCovariance(
                "empirical likelihood Jacobian",
            )));
        };
        let step = chol.solve(&grad);
        let decrement = grad.dot(&step);
        if decrement <= DECREMENT_TOL * n as f64 {
            // One undamped step squares the residual, so the weights sum to
            // one and meet the moment constraint to round-off.
            if !polished && decrement > 0.0 {
                polished = true;
                let cand = &lambda + &step;
                if let Some(o) = dual_objective(&z, &cand, floor) {
                    lambda = cand;
                    obj = o;
                    continue;
                }
            }
            let cross = zw.tr_mul(&w);
            let weights: Vec<f64> = w.iter().map(|wi| wi / n as f64).collect();
            return Ok(ElOneSample {
                weights: ElWeights {
                    lambda: lambda.iter().copied().collect(),
                    weights,
                    mu: mu.iter().copied().collect(),
                },
                statistic: (2.0 * obj).max(0.0),
                iterations: iter,
                jac,
                cross,
                lambda,
            });
        }
        // Largest step keeping every 1 + λᵀzᵢ above the floor.
        let dt = &z * &step;
        let mut s = 1.0_f64;
        for (ti, dti) in t.iter().zip(dt.iter()) {
            if *dti < 0.0 {
                s = s.min(0.99 * (1.0 + ti - floor) / -dti);
            }
        }
        let mut accepted = false;
        while s > 1e-14 {
            let cand = &lambda + &step * s;
            if let Some(o) = dual_objective(&z, &cand, floor) {
                if o >= obj + 1e-4 * s * decrement {
                    lambda = cand;
                    obj = o;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        // For interior μ every λ ≠ 0 has some λᵀzᵢ < 0, so a λ with all
        // λᵀzᵢ ≥ 0 separates μ from the hull.
        let t = &z * &lambda;
        let separating = t.min() >= 0.0 && t.max() > 0.0;
        if !accepted || separating || lambda.norm() * zmax > DIVERGENCE_SCALE {
            return Err(DualFailure::Stalled(z, iter, decrement));
        }
    }
    Err(DualFailure::Stalled(z, MAX_INNER, f64::NAN))
}

fn classify_failure(z: &DMatrix<f64>, index: usize, iterations: usize, residual: f64) -> Error {
    let origin = DMatrix::zeros(1, z.ncols());
    match hull_separation(z, &origin) {
        Separation::Disjoint => Error::OutsideHull { sample: index },
        _ => Error::NonConvergence { iterations, residual },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Separation {
    Disjoint,
    Touching,
    Unknown,
}

/// Frank–Wolfe on `min ‖Aᵀα − Bᵀβ‖²` over pairs of probability vectors.
/// The duality gap gives a lower bound on the distance, which certifies
/// disjointness when it is positive.
fn hull_separation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Separation {
    let scale = a
        .row_iter()
        .chain(b.row_iter())
        .map(|r| r.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut pa = a.row_mean().transpose();
    let mut pb = b.row_mean().transpose();
    for _ in 0..20_000 {
        let r = &pa - &pb;
        let f = r.norm_squared();
        if f <= (1e-12 * scale).powi(2) {
            return Separation::Touching;
        }
        let (ia, _) = (0..a.nrows())
            .map(|i| (i, a.row(i).dot(&r.transpose())))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let (ib, _) = (0..b.nrows())
            .map(|i| (i, -b.row(i).dot(&r.transpose())))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let va = a.row(ia).transpose();
        let vb = b.row(ib).transpose();
        let dir = (&va - &vb) - &r;
        let gap = -2.0 * r.dot(&dir);
        if f - gap > (1e-9 * scale).powi(2) {
            return Separation::Disjoint;
        }
        if gap <= (1e-14 * scale).powi(2) {
            return Separation::Touching;
        }
        let denom = dir.norm_squared();
        let step = if denom > 0.0 {
            (-r.dot(&dir) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        pa = &pa * (1.0 - step) + va * step;
        pb = &pb * (1.0 - step) + vb * step;
    }
    Separation::Unknown
}

/// Whether `point` lies in the closed convex hull of the rows of `sample`.
pub fn in_convex_hull(sample: &EuclideanSample, point: &[f64]) -> bool {
    let p = DMatrix::from_row_slice(1, point.len(), point);
    hull_separation(sample.matrix(), &p) != Separation::Disjoint
}

/// Whether the convex hulls of two samples intersect.
pub fn hulls_intersect(s1: &EuclideanSample, s2: &EuclideanSample) -> bool {
    hull_separation(s1.matrix(), s2.matrix()) != Separation::Disjoint
}

struct Evaluation {
    value: f64,
    parts: [ElOneSample; 2],
    inner_iterations: usize,
}

fn evaluate(s1: &EuclideanSample, s2: &EuclideanSample, mu: &DVector<f64>) -> Result<Evaluation> {
    let a = one_sample(s1, mu, 1)?;
    let b = one_sample(s2, mu, 2)?;
    Ok(combine(a, b))
}

fn try_evaluate(s1: &EuclideanSample, s2: &EuclideanSample, mu: &DVector<f64>) -> Option<Evaluation> {
    let a = solve_dual(s1, mu).ok()?;
    let b = solve_dual(s2, mu).ok()?;
    Some(combine(a, b))
}

fn combine(a: ElOneSample, b: ElOneSample) -> Evaluation {
    Evaluation {
        value: a.statistic + b.statistic,
        inner_iterations: a.iterations + b.iterations,
        parts: [a, b],
    }
}

fn gradient(ev: &Evaluation, sizes: [f64; 2]) -> DVector<f64> {
    -(&ev.parts[0].lambda * sizes[0] + &ev.parts[1].lambda * sizes[1]) * 2.0
}

fn hessian(ev: &Evaluation, sizes: [f64; 2]) -> DMatrix<f64> {
    let d = ev.parts[0].lambda.len();
    let eye = DMatrix::<f64>::identity(d, d);
    let mut exact = DMatrix::zeros(d, d);
    let mut approx = DMatrix::zeros(d, d);
    for (part, n) in ev.parts.iter().zip(sizes) {
        let Some(jinv) = part.jac.clone().try_inverse() else {
            continue;
        };
        exact += &jinv * (&eye * n - &part.cross * part.lambda.transpose()) * (2.0 * n);
        approx += &jinv * (2.0 * n * n);
    }
    symmetrize(&mut exact);
    if exact.clone().cholesky().is_some() {
        exact
    } else {
        approx
    }
}

/// The minimised two-sample statistic and its solver diagnostics.
#[derive(Debug, Clone)]
pub struct ElFit {
    pub statistic: f64,
    pub mu_hat: DVector<f64>,
    pub weights: (ElWeights, ElWeights),
    pub lambdas: (DVector<f64>, DVector<f64>),
    pub report: SolverReport,
}

fn starting_points(s1: &EuclideanSample, s2: &EuclideanSample) -> Vec<DVector<f64>> {
    let (m1, m2) = (s1.mean(), s2.mean());
    let (n1, n2) = (s1.len() as f64, s2.len() as f64);
    let mut starts = Vec::new();
    if let Ok(c) = crate::bootstrap::common_mean_of(s1, s2) {
        starts.push(c);
    }
    starts.push((&m1 * n1 + &m2 * n2) / (n1 + n2));
    for t in [0.5, 0.25, 0.75, 0.1, 0.9, 0.0, 1.0] {
        starts.push(&m1 * (1.0 - t) + &m2 * t);
    }
    starts
}

/// Minimises the summed one-sample statistics over the common mean.
pub fn el_fit(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<ElFit> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    let d = s1.dim();
    let sizes = [s1.len() as f64, s2.len() as f64];
    let Some((mut mu, mut ev)) = starting_points(s1, s2)
        .into_iter()
        .find_map(|mu| try_evaluate(s1, s2, &mu).map(|ev| (mu, ev)))
    else {
        if !hulls_intersect(s1, s2) {
            return Err(Error::EmptyHullIntersection);
        }
        // Surface the diagnosis at the pooled mean.
        let pooled = &starting_points(s1, s2)[0];
        return Err(evaluate(s1, s2, pooled)
            .err()
            .unwrap_or(Error::EmptyHullIntersection));
    };

    let max_outer = 500 * d;
    let mut inner_total = ev.inner_iterations;
    let mut converged = false;
    let mut outer = 0;
    let mut last_decrement = f64::INFINITY;
    while outer < max_outer {
        let grad = gradient(&ev, sizes);
        let h = hessian(&ev, sizes);
        let Some(chol) = h.cholesky() else {
            break;
        };
        let step = -chol.solve(&grad);
        let decrement = -grad.dot(&step);
        last_decrement = decrement;
        // Λ is then accurate to about 1e-14 relative.
        if decrement <= 1e-14 * (1.0 + ev.value) {
            converged = true;
            break;
        }
        outer += 1;
        let mut s = 1.0;
        let mut moved = false;
        while s > 1e-12 {
            let cand = &mu + &step * s;
            if cand == mu {
                break;
            }
            if let Some(next) = try_evaluate(s1, s2, &cand) {
                inner_total += next.inner_iterations;
                if next.value <= ev.value - 1e-4 * s * decrement {
                    mu = cand;
                    ev = next;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !moved {
            // Round-off floor: no representable descent left.
            converged = decrement <= 1e-10 * (1.0 + ev.value);
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: outer,
            residual: last_decrement,
        });
    }

    let verified_minimum = probe_minimum(s1, s2, &mu, ev.value);
    let [a, b] = ev.parts;
    let balance = (&a.lambda * sizes[0] + &b.lambda * sizes[1]).norm();
    let report = SolverReport {
        outer_iterations: outer,
        inner_iterations: inner_total,
        converged,
        hull_status: HullStatus::Inside,
        residual: last_decrement,
        lambda_balance: Some(balance),
        verified_minimum: Some(verified_minimum),
    };
    Ok(ElFit {
        statistic: ev.value.max(0.0),
        mu_hat: mu,
        lambdas: (a.lambda.clone(), b.lambda.clone()),
        weights: (a.weights, b.weights),
        report,
    })
}

// Coordinate probes around the reported minimiser; a probe whose inner
// problems are infeasible does not count against the minimum.
fn probe_minimum(s1: &EuclideanSample, s2: &EuclideanSample, mu: &DVector<f64>, value: f64) -> bool {
    let spread = (s1.matrix().amax() + s2.matrix().amax()).max(1e-300);
    let h = 1e-5 * spread;
    let tol = 1e-9 * (1.0 + value);
    (0..mu.len()).all(|k| {
        [-h, h].iter().all(|&dh| {
            let mut p = mu.clone();
            p[k] += dh;
            try_evaluate(s1, s2, &p).is_none_or(|ev| ev.value >= value - tol)
        })
    })
}

/// The two-sample statistic only; used by the bootstrap.
pub fn el_statistic(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<f64> {
    el_fit(s1, s2).map(|f| f.statistic)
}

/// Fits the statistic and calibrates it.
pub fn el_two_sample(
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    calibration: &crate::procedure::Calibration,
) -> Result<ElResult> {
    let fit = el_fit(s1, s2)?;
    let p_value = crate::procedure::calibrated_pvalue(fit.statistic, calibration, s1, s2, &el_statistic)?;
    Ok(ElResult {
        statistic: fit.statistic,
        mu_hat: fit.mu_hat.iter().copied().collect(),
        lambdas: (
            fit.lambdas.0.iter().copied().collect(),
            fit.lambdas.1.iter().copied().collect(),
        ),
        p_value,
        calibration: calibration.kind(),
        solver_report: fit.report,
    })
}
