//! Hotelling's T² and James' T²ᵤ with their analytic calibrations.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::compositional::EuclideanSample;
use crate::distributions::{chi2_sf, f_sf};
use crate::linalg::{quad_form, spd_inverse, symmetrize};
use crate::procedure::CalibrationKind;
use crate::{Error, Result};

/// Mean, unbiased covariance and size of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub n: usize,
}

pub fn moments(sample: &EuclideanSample) -> Result<SampleMoments> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, have: n });
    }
    let mean = sample.mean();
    let d = sample.dim();
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        let r = sample.row(i) - &mean;
        cov.ger(1.0, &r, &r, 1.0);
    }
    cov /= (n - 1) as f64;
    symmetrize(&mut cov);
    Ok(SampleMoments { mean, cov, n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticResult {
    pub statistic: f64,
    pub p_value: f64,
    pub calibration: CalibrationKind,
    /// Calibration constants: `A`, `B`, `nu`, `df1`, `df2`, `scale`.
    pub aux: BTreeMap<String, f64>,
}

fn check_pair(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<()> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    Ok(())
}

/// T² with the pooled covariance.
pub fn hotelling_statistic(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<f64> {
    check_pair(s1, s2)?;
    let m1 = moments(s1)?;
    let m2 = moments(s2)?;
    hotelling_from_moments(&m1, &m2)
}

pub(crate) fn hotelling_from_moments(m1: &SampleMoments, m2: &SampleMoments) -> Result<f64> {
    let (n1, n2) = (m1.n as f64, m2.n as f64);
    let pooled = (&m1.cov * (n1 - 1.0) + &m2.cov * (n2 - 1.0)) / (n1 + n2 - 2.0);
    let scaled = pooled * (1.0 / n1 + 1.0 / n2);
    let inv = spd_inverse(&scaled, "pooled")?;
    let diff = &m1.mean - &m2.mean;
    Ok(quad_form(&inv, &diff).max(0.0))
}

/// Hotelling's test referred to `(n₁+n₂)d/(n₁+n₂−d+1) · F(d, n₁+n₂−d+1)`.
pub fn hotelling(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<QuadraticResult> {
    let t2 = hotelling_statistic(s1, s2)?;
    let d = s1.dim() as f64;
    let n = (s1.len() + s2.len()) as f64;
    let df2 = n - d + 1.0;
    if df2 <= 0.0 {
        return Err(Error::InsufficientData {
            needed: s1.dim(),
            have: s1.len() + s2.len(),
        });
    }
    let scale = n * d / df2;
    let p_value = f_sf(t2 / scale, d, df2)?;
    let aux = BTreeMap::from([
        ("df1".to_string(), d),
        ("df2".to_string(), df2),
        ("scale".to_string(), scale),
    ]);
    Ok(QuadraticResult {
        statistic: t2,
        p_value,
        calibration: CalibrationKind::F,
        aux,
    })
}

/// T²ᵤ together with `S̃₁ = S₁/n₁`, `S̃₂ = S₂/n₂` and `S̃ = S̃₁ + S̃₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct JamesStatistic {
    pub t2: f64,
    pub s1_tilde: DMatrix<f64>,
    pub s2_tilde: DMatrix<f64>,
    pub s_tilde: DMatrix<f64>,
    pub s_tilde_inv: DMatrix<f64>,
    pub n1: usize,
    pub n2: usize,
}

impl JamesStatistic {
    pub fn dim(&self) -> usize {
        self.s_tilde.nrows()
    }
}

pub fn james_statistic(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<JamesStatistic> {
    check_pair(s1, s2)?;
    let m1 = moments(s1)?;
    let m2 = moments(s2)?;
    james_from_moments(&m1, &m2)
}

pub(crate) fn james_from_moments(m1: &SampleMoments, m2: &SampleMoments) -> Result<JamesStatistic> {
    let s1_tilde = &m1.cov / m1.n as f64;
    let s2_tilde = &m2.cov / m2.n as f64;
    let s_tilde = &s1_tilde + &s2_tilde;
    let s_tilde_inv = spd_inverse(&s_tilde, "S1/n1 + S2/n2")?;
    let diff = &m1.mean - &m2.mean;
    Ok(JamesStatistic {
        t2: quad_form(&s_tilde_inv, &diff).max(0.0),
        s1_tilde,
        s2_tilde,
        s_tilde,
        s_tilde_inv,
        n1: m1.n,
        n2: m2.n,
    })
}

/// The correction constants `A` and `B` of James' corrected χ² quantile.
pub fn james_coefficients(
    s1_tilde: &DMatrix<f64>,
    s2_tilde: &DMatrix<f64>,
    s_tilde: &DMatrix<f64>,
    n1: usize,
    n2: usize,
) -> Result<(f64, f64)> {
    let inv = spd_inverse(s_tilde, "S1/n1 + S2/n2")?;
    let d = s_tilde.nrows() as f64;
    let mut sum_tr_sq = 0.0; // Σ [tr(S̃⁻¹S̃ᵢ)]² / (nᵢ−1)
    let mut sum_sq_tr = 0.0; // Σ tr[(S̃⁻¹S̃ᵢ)²] / (nᵢ−1)
    for (si, ni) in [(s1_tilde, n1), (s2_tilde, n2)] {
        check_square(si, s_tilde.nrows())?;
        let m = &inv * si;
        let tr = m.trace();
        sum_tr_sq += tr * tr / (ni as f64 - 1.0);
        sum_sq_tr += (&m * &m).trace() / (ni as f64 - 1.0);
    }
    let a = 1.0 + sum_tr_sq / (2.0 * d);
    let b = (0.5 * sum_sq_tr + 0.5 * sum_tr_sq) / (d * (d + 2.0));
    Ok((a, b))
}

fn check_square(m: &DMatrix<f64>, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.nrows(),
        });
    }
    Ok(())
}

/// p-value of `t2` against the corrected quantile `q(A + Bq)`, `q ~ χ²_d`.
///
/// Solves `q(A + Bq) = t2` for `q ≥ 0` and returns `P(χ²_d > q)`, so that
/// `p < α` exactly when `t2` exceeds the corrected critical value.
pub fn james_pvalue_corrected_chi2(t2: f64, a: f64, b: f64, d: usize) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "corrected chi2 needs A > 0 and B >= 0 (A = {a}, B = {b})"
        )));
    }
    let q = corrected_chi2_root(t2.max(0.0), a, b);
    chi2_sf(q, d as f64)
}

pub(crate) fn corrected_chi2_root(t2: f64, a: f64, b: f64) -> f64 {
    if b == 0.0 {
        t2 / a
    } else {
        // Rationalised form of (−A + √(A² + 4Bt))/(2B), stable for small B.
        2.0 * t2 / (a + (a * a + 4.0 * b * t2).sqrt())
    }
}

/// Krishnamoorthy–Yu degrees of freedom for the F approximation of T²ᵤ.
pub fn krishnamoorthy_nu(
    s1_tilde: &DMatrix<f64>,
    s2_tilde: &DMatrix<f64>,
    s_tilde: &DMatrix<f64>,
    n1: usize,
    n2: usize,
) -> Result<f64> {
    let inv = spd_inverse(s_tilde, "S1/n1 + S2/n2")?;
    let d = s_tilde.nrows() as f64;
    let mut denom = 0.0;
    for (si, ni) in [(s1_tilde, n1), (s2_tilde, n2)] {
        check_square(si, s_tilde.nrows())?;
        let m = si * &inv;
        let tr = m.trace();
        denom += ((&m * &m).trace() + tr * tr) / ni as f64;
    }
    let nu = (d + d * d) / denom;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::CalibrationUndefined(format!(
            "degenerate degrees of freedom {nu}"
        )));
    }
    Ok(nu)
}

/// p-value of `t2` under `νd/(ν−d+1) · F(d, ν−d+1)`.
pub fn james_pvalue_f(t2: f64, nu: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let df2 = nu - df + 1.0;
    if df2.is_nan() || df2 <= 0.0 {
        return Err(Error::CalibrationUndefined(format!(
            "nu = {nu} leaves no denominator degrees of freedom for d = {d}"
        )));
    }
    f_sf(t2.max(0.0) * df2 / (nu * df), df, df2)
}

/// James' test with an analytic calibration.
pub fn james(
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    calibration: CalibrationKind,
) -> Result<QuadraticResult> {
    let js = james_statistic(s1, s2)?;
    let d = js.dim();
    let mut aux = BTreeMap::new();
    let p_value = match calibration {
        CalibrationKind::Chi2 => chi2_sf(js.t2, d as f64)?,
        CalibrationKind::CorrectedChi2 => {
            let (a, b) = james_coefficients(&js.s1_tilde, &js.s2_tilde, &js.s_tilde, js.n1, js.n2)?;
            aux.insert("A".to_string(), a);
            aux.insert("B".to_string(), b);
            james_pvalue_corrected_chi2(js.t2, a, b, d)?
        }
        CalibrationKind::F => {
            let nu = krishnamoorthy_nu(&js.s1_tilde, &js.s2_tilde, &js.s_tilde, js.n1, js.n2)?;
            aux.insert("nu".to_string(), nu);
            james_pvalue_f(js.t2, nu, d)?
        }
        CalibrationKind::Bootstrap => {
            return Err(Error::CalibrationUndefined(
                "bootstrap calibration is run through procedure::run_test".into(),
            ))
        }
    };
    Ok(QuadraticResult {
        statistic: js.t2,
        p_value,
        calibration,
        aux,
    })
}
