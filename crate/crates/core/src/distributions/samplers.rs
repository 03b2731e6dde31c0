//! Dirichlet, Dirichlet-mixture and logistic-normal populations on the simplex.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::RngStream;
use crate::compositional::{alr_inverse, CompositionalSample};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "Dirichlet needs at least 2 parts, got {}",
                alpha.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet parameters must be positive, got {a}"
            )));
        }
        Ok(Self { alpha })
    }

    /// Parameters `precision · mean`.
    pub fn from_mean(mean: &[f64], precision: f64) -> Result<Self> {
        Self::new(mean.iter().map(|m| m * precision).collect())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn parts(&self) -> usize {
        self.alpha.len()
    }

    /// `Σ α_i`.
    pub fn precision(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let s = self.precision();
        self.alpha.iter().map(|a| a / s).collect()
    }

    fn draw<R: Rng + ?Sized>(&self, gammas: &[Gamma<f64>], rng: &mut R, out: &mut [f64]) {
        loop {
            let mut total = 0.0;
            for (o, g) in out.iter_mut().zip(gammas) {
                *o = g.sample(rng);
                total += *o;
            }
            // All parts underflowing at once is possible only for tiny α.
            if total > 0.0 && total.is_finite() {
                out.iter_mut().for_each(|o| *o /= total);
                return;
            }
        }
    }

    fn gammas(&self) -> Vec<Gamma<f64>> {
        self.alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("alpha validated positive"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletMixture {
    weights: Vec<f64>,
    components: Vec<DirichletParams>,
}

impl DirichletMixture {
    pub fn new(weights: Vec<f64>, components: Vec<DirichletParams>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidParameter(
                "mixture needs one weight per component".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let parts = components[0].parts();
        if let Some(c) = components.iter().find(|c| c.parts() != parts) {
            return Err(Error::DimensionMismatch {
                expected: parts,
                found: c.parts(),
            });
        }
        Ok(Self { weights, components })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[DirichletParams] {
        &self.components
    }

    pub fn parts(&self) -> usize {
        self.components[0].parts()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.parts()];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for (mi, ci) in m.iter_mut().zip(c.mean()) {
                *mi += w * ci;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticNormalParams {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    // None when sigma is the zero matrix.
    chol: Option<DMatrix<f64>>,
}

impl LogisticNormalParams {
    pub fn new(mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(Error::InvalidDimension("empty mean vector".into()));
        }
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: sigma.nrows(),
            });
        }
        if (&sigma - sigma.transpose()).amax() > 1e-10 {
            return Err(Error::InvalidParameter("sigma is not symmetric".into()));
        }
        let chol = if sigma.iter().all(|v| *v == 0.0) {
            None
        } else {
            Some(
                sigma
                    .clone()
                    .cholesky()
                    .ok_or(Error::InvalidParameter("sigma is not positive definite".into()))?
                    .l(),
            )
        };
        Ok(Self {
            mu: DVector::from_vec(mu),
            sigma,
            chol,
        })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn parts(&self) -> usize {
        self.mu.len() + 1
    }
}

/// A generative population on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    Dirichlet(DirichletParams),
    Mixture(DirichletMixture),
    LogisticNormal(LogisticNormalParams),
}

impl Population {
    pub fn parts(&self) -> usize {
        match self {
            Population::Dirichlet(p) => p.parts(),
            Population::Mixture(m) => m.parts(),
            Population::LogisticNormal(l) => l.parts(),
        }
    }

    /// Closed-form mean, when one exists.
    pub fn mean(&self) -> Option<Vec<f64>> {
        match self {
            Population::Dirichlet(p) => Some(p.mean()),
            Population::Mixture(m) => Some(m.mean()),
            Population::LogisticNormal(_) => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CompositionalSample> {
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, have: n });
        }
        let parts = self.parts();
        let mut data = DMatrix::zeros(n, parts);
        let mut row = vec![0.0; parts];
        match self {
            Population::Dirichlet(p) => {
                let g = p.gammas();
                for i in 0..n {
                    p.draw(&g, rng, &mut row);
                    data.row_mut(i).copy_from_slice(&row);
                }
            }
            Population::Mixture(m) => {
                let gs: Vec<_> = m.components.iter().map(|c| c.gammas()).collect();
                for i in 0..n {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut k = m.weights.len() - 1;
                    for (j, w) in m.weights.iter().enumerate() {
                        acc += w;
                        if u < acc {
                            k = j;
                            break;
                        }
                    }
                    // Skip zero-weight components that rounding could land on.
                    while m.weights[k] == 0.0 && k > 0 {
                        k -= 1;
                    }
                    m.components[k].draw(&gs[k], rng, &mut row);
                    data.row_mut(i).copy_from_slice(&row);
                }
            }
            Population::LogisticNormal(l) => {
                let d = l.mu.len();
                let mut z = DVector::zeros(d);
                for i in 0..n {
                    let v = match &l.chol {
                        Some(chol) => {
                            z.iter_mut().for_each(|zi| *zi = rng.sample(StandardNormal));
                            &l.mu + chol * &z
                        }
                        None => l.mu.clone(),
                    };
                    let c = alr_inverse(v.as_slice())?;
                    data.row_mut(i).copy_from_slice(c.values());
                }
            }
        }
        Ok(CompositionalSample::from_matrix_unchecked(data))
    }
}

pub fn sample_dirichlet(
    params: &DirichletParams,
    n: usize,
    stream: &RngStream,
) -> Result<CompositionalSample> {
    Population::Dirichlet(params.clone()).sample(n, &mut stream.rng())
}

pub fn sample_dirichlet_mixture(
    mix: &DirichletMixture,
    n: usize,
    stream: &RngStream,
) -> Result<CompositionalSample> {
    Population::Mixture(mix.clone()).sample(n, &mut stream.rng())
}

pub fn sample_logistic_normal(
    params: &LogisticNormalParams,
    n: usize,
    stream: &RngStream,
) -> Result<CompositionalSample> {
    Population::LogisticNormal(params.clone()).sample(n, &mut stream.rng())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_valid(s: &CompositionalSample) {
        for i in 0..s.len() {
            let r = s.row(i);
            assert!(r.iter().all(|v| *v >= 0.0));
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn uniform_dirichlet_mean() {
        let p = DirichletParams::new(vec![1.0; 4]).unwrap();
        let s = sample_dirichlet(&p, 100_000, &RngStream::new(1, 0)).unwrap();
        assert_valid(&s);
        close(&s.mean(), &[0.25; 4], 0.005);
    }

    #[test]
    fn small_shape_dirichlet_mean() {
        let alpha = vec![0.148, 0.222, 0.296, 0.333];
        let p = DirichletParams::new(alpha.clone()).unwrap();
        let s = sample_dirichlet(&p, 100_000, &RngStream::new(2, 0)).unwrap();
        assert_valid(&s);
        let total: f64 = alpha.iter().sum();
        let want: Vec<f64> = alpha.iter().map(|a| a / total).collect();
        close(&s.mean(), &want, 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = DirichletParams::new(vec![0.5, 2.0, 3.0]).unwrap();
        let a = sample_dirichlet(&p, 50, &RngStream::new(9, 4)).unwrap();
        let b = sample_dirichlet(&p, 50, &RngStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixture_mean_matches_analytic() {
        let unit = [4.0 / 27.0, 6.0 / 27.0, 8.0 / 27.0, 9.0 / 27.0];
        let mix = DirichletMixture::new(
            vec![0.3, 0.7],
            vec![
                DirichletParams::new(vec![0.889, 1.333, 1.778, 2.000]).unwrap(),
                DirichletParams::new(vec![1.481, 2.222, 2.963, 3.333]).unwrap(),
            ],
        )
        .unwrap();
        let s = sample_dirichlet_mixture(&mix, 100_000, &RngStream::new(3, 0)).unwrap();
        assert_valid(&s);
        close(&s.mean(), &unit, 0.01);
        close(&s.mean(), &mix.mean(), 0.01);
    }

    #[test]
    fn degenerate_mixture_is_its_component() {
        let c1 = DirichletParams::new(vec![2.0, 3.0, 5.0]).unwrap();
        let c2 = DirichletParams::new(vec![9.0, 1.0, 1.0]).unwrap();
        let mix = DirichletMixture::new(vec![1.0, 0.0], vec![c1.clone(), c2]).unwrap();
        let a = sample_dirichlet_mixture(&mix, 4000, &RngStream::new(5, 0)).unwrap();
        let b = sample_dirichlet(&c1, 4000, &RngStream::new(5, 1)).unwrap();
        // Two-sample KS on the first coordinate; 1% critical value is
        // 1.63 √(2/n).
        let mut xa: Vec<f64> = (0..a.len()).map(|i| a.row(i)[0]).collect();
        let mut xb: Vec<f64> = (0..b.len()).map(|i| b.row(i)[0]).collect();
        xa.sort_by(f64::total_cmp);
        xb.sort_by(f64::total_cmp);
        let (mut i, mut j, mut dmax) = (0usize, 0usize, 0.0f64);
        while i < xa.len() && j < xb.len() {
            if xa[i] <= xb[j] {
                i += 1;
            } else {
                j += 1;
            }
            dmax = dmax.max((i as f64 / xa.len() as f64 - j as f64 / xb.len() as f64).abs());
        }
        assert!(dmax < 1.63 * (2.0 / 4000.0f64).sqrt(), "KS distance {dmax}");
    }

    #[test]
    fn identical_components_match_single_dirichlet_mean() {
        let c = DirichletParams::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mix = DirichletMixture::new(vec![0.5, 0.5], vec![c.clone(), c.clone()]).unwrap();
        assert_eq!(mix.mean(), c.mean());
        let s = sample_dirichlet_mixture(&mix, 50_000, &RngStream::new(6, 0)).unwrap();
        close(&s.mean(), &c.mean(), 0.01);
    }

    #[test]
    fn logistic_normal_zero_sigma_is_constant() {
        let mu = vec![0.3, -0.2, 1.0];
        let p = LogisticNormalParams::new(mu.clone(), DMatrix::zeros(3, 3)).unwrap();
        let s = sample_logistic_normal(&p, 10, &RngStream::new(1, 1)).unwrap();
        let want = alr_inverse(&mu).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.row(i), want.values());
        }
    }

    #[test]
    fn logistic_normal_rejects_bad_sigma() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(LogisticNormalParams::new(vec![0.0, 0.0], bad).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 1.0]);
        assert!(LogisticNormalParams::new(vec![0.0, 0.0], asym).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(DirichletParams::new(vec![1.0, 0.0]).is_err());
        assert!(DirichletParams::new(vec![1.0]).is_err());
        let c = DirichletParams::new(vec![1.0, 1.0]).unwrap();
        assert!(DirichletMixture::new(vec![0.5, 0.6], vec![c.clone(), c.clone()]).is_err());
    }
}
