//! Nonparametric bootstrap calibration under the null of equal means.
//!
//! Both samples are shifted to the precision-weighted common mean
//! `μ̂_c = [(n₁−1)S₁⁻¹ + (n₂−1)S₂⁻¹]⁻¹ [(n₁−1)S₁⁻¹x̄₁ + (n₂−1)S₂⁻¹x̄₂]`,
//! resampled with replacement, and the statistic recomputed on each
//! replicate. The p-value is `(#{T_b > T_obs} + 1)/(B + 1)` over the
//! replicates where the statistic could be computed.
//!
//! Replicate `b` draws from its own random stream `(master_seed, b)`, so
//! the result does not depend on how replicates are scheduled.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compositional::EuclideanSample;
use crate::distributions::RngStream;
use crate::linalg::spd_inverse;
use crate::quadratic::{moments, SampleMoments};
use crate::{Error, Result};

/// Default number of replicates.
pub const DEFAULT_REPLICATES: usize = 299;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub master_seed: u64,
    /// Worker bound; `None` uses the ambient rayon pool.
    pub max_parallelism: Option<usize>,
    /// Fail when more than this fraction of replicates is uncomputable.
    pub max_failure_fraction: f64,
    pub keep_replicates: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            max_parallelism: None,
            max_failure_fraction: 0.1,
            keep_replicates: false,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, master_seed: u64) -> Self {
        Self {
            replicates,
            master_seed,
            ..Self::default()
        }
    }

    pub fn with_max_parallelism(mut self, workers: usize) -> Self {
        self.max_parallelism = Some(workers);
        self
    }

    pub fn with_replicates_kept(mut self) -> Self {
        self.keep_replicates = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapOutcome {
    pub t_obs: f64,
    pub p_value: f64,
    pub replicate_statistics: Option<Vec<f64>>,
    pub exceedances: usize,
    pub successes: usize,
    pub failures: usize,
}

/// Precision-weighted estimate of the common mean.
pub fn common_mean_estimate(m1: &SampleMoments, m2: &SampleMoments) -> Result<DVector<f64>> {
    let w1 = spd_inverse(&m1.cov, "S1")? * (m1.n as f64 - 1.0);
    let w2 = spd_inverse(&m2.cov, "S2")? * (m2.n as f64 - 1.0);
    let rhs = &w1 * &m1.mean + &w2 * &m2.mean;
    crate::linalg::spd_solve(&(w1 + w2), &rhs, "(n1-1)S1^-1 + (n2-1)S2^-1")
}

pub fn common_mean_of(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<DVector<f64>> {
    common_mean_estimate(&moments(s1)?, &moments(s2)?)
}

/// Shifts each sample so that both means equal `μ̂_c`.
pub fn center_to_null(
    s1: &EuclideanSample,
    s2: &EuclideanSample,
) -> Result<(EuclideanSample, EuclideanSample)> {
    let m1 = moments(s1)?;
    let m2 = moments(s2)?;
    let c = common_mean_estimate(&m1, &m2)?;
    Ok((s1.translate(&(&c - &m1.mean)), s2.translate(&(&c - &m2.mean))))
}

/// Row indices of replicate `index`: `n1` draws for the first sample then
/// `n2` for the second, both from the replicate's own stream.
pub fn replicate_indices(seed: u64, index: usize, n1: usize, n2: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = RngStream::new(seed, index as u64).rng();
    let a = (0..n1).map(|_| rng.random_range(0..n1)).collect();
    let b = (0..n2).map(|_| rng.random_range(0..n2)).collect();
    (a, b)
}

/// Computes `T_obs` and calibrates it.
pub fn bootstrap_pvalue<F>(
    statistic: &F,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    cfg: &BootstrapConfig,
) -> Result<BootstrapOutcome>
where
    F: Fn(&EuclideanSample, &EuclideanSample) -> Result<f64> + Sync + ?Sized,
{
    let t_obs = statistic(s1, s2)?;
    bootstrap_with_observed(statistic, t_obs, s1, s2, cfg)
}

/// Calibrates an already computed `t_obs`.
pub fn bootstrap_with_observed<F>(
    statistic: &F,
    t_obs: f64,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    cfg: &BootstrapConfig,
) -> Result<BootstrapOutcome>
where
    F: Fn(&EuclideanSample, &EuclideanSample) -> Result<f64> + Sync + ?Sized,
{
    if cfg.replicates == 0 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    if !t_obs.is_finite() {
        return Err(Error::Bootstrap(format!("observed statistic is {t_obs}")));
    }
    let (y1, y2) = center_to_null(s1, s2)?;
    let (n1, n2) = (y1.len(), y2.len());
    let run = |b: usize| -> Option<f64> {
        let (i1, i2) = replicate_indices(cfg.master_seed, b, n1, n2);
        statistic(&y1.select_rows(&i1), &y2.select_rows(&i2))
            .ok()
            .filter(|t| t.is_finite())
    };
    let stats: Vec<Option<f64>> = match cfg.max_parallelism {
        Some(1) => (0..cfg.replicates).map(run).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Bootstrap(e.to_string()))?
            .install(|| (0..cfg.replicates).into_par_iter().map(run).collect()),
        None => (0..cfg.replicates).into_par_iter().map(run).collect(),
    };
    let successes = stats.iter().flatten().count();
    let failures = cfg.replicates - successes;
    if successes == 0 {
        return Err(Error::Bootstrap("every replicate failed".into()));
    }
    if failures as f64 > cfg.max_failure_fraction * cfg.replicates as f64 {
        return Err(Error::Bootstrap(format!(
            "{failures} of {} replicates failed",
            cfg.replicates
        )));
    }
    let exceedances = stats.iter().flatten().filter(|&&t| t > t_obs).count();
    Ok(BootstrapOutcome {
        t_obs,
        p_value: (exceedances + 1) as f64 / (successes + 1) as f64,
        replicate_statistics: cfg
            .keep_replicates
            .then(|| stats.iter().flatten().copied().collect()),
        exceedances,
        successes,
        failures,
    })
}
