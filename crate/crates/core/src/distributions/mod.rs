//! Reference distributions for the analytic calibrations and random samplers
//! for the simulation populations.

mod rng;
mod samplers;
mod special;

pub use rng::{mix_seed, RngStream};
pub use samplers::{
    sample_dirichlet, sample_dirichlet_mixture, sample_logistic_normal, DirichletMixture, DirichletParams,
    LogisticNormalParams, Population,
};
pub use special::{
    chi2_cdf, chi2_pdf, chi2_quantile, chi2_sf, f_cdf, f_pdf, f_quantile, f_sf, ln_gamma, regularized_beta,
    regularized_gamma_p, regularized_gamma_q,
};
