//! Two-sample tests for equality of mean vectors of data on the simplex.
//!
//! Compositions are mapped to Euclidean space with the Helmert sub-matrix and
//! then compared with one of four statistics:
//!
//! * [Hotelling's T²](quadratic::hotelling), assuming equal covariances;
//! * [James' T²ᵤ](quadratic::james_statistic) for unequal covariances;
//! * [empirical likelihood](el::el_two_sample) (EL), minimised over a common mean;
//! * [exponential empirical likelihood](eel::eel_two_sample) (EEL), solved
//!   through a single tilting parameter.
//!
//! Each statistic can be referred to an F, a χ² or a James-corrected χ²
//! distribution, or calibrated with the [null-centred bootstrap](bootstrap).
//! The [`simulation`] module reproduces Type I error and power studies on the
//! canned Dirichlet and logistic-normal populations.
//!
//! ```
//! use simplex_means::compositional::{helmert_transform, CompositionalSample};
//! use simplex_means::procedure::{run_test, Calibration, TestKind};
//!
//! let a = CompositionalSample::from_rows(vec![
//!     vec![0.2, 0.3, 0.5],
//!     vec![0.3, 0.3, 0.4],
//!     vec![0.25, 0.35, 0.4],
//!     vec![0.2, 0.4, 0.4],
//!     vec![0.3, 0.2, 0.5],
//! ])?;
//! let b = CompositionalSample::from_rows(vec![
//!     vec![0.3, 0.3, 0.4],
//!     vec![0.2, 0.35, 0.45],
//!     vec![0.25, 0.25, 0.5],
//!     vec![0.35, 0.3, 0.35],
//!     vec![0.2, 0.3, 0.5],
//! ])?;
//! let (ya, yb) = (helmert_transform(&a), helmert_transform(&b));
//! let res = run_test(TestKind::James, &Calibration::F, &ya, &yb)?;
//! assert!((0.0..=1.0).contains(&res.p_value));
//! # Ok::<(), simplex_means::Error>(())
//! ```

pub mod bootstrap;
pub mod compositional;
pub mod distributions;
pub mod eel;
pub mod el;
mod error;
pub mod linalg;
pub mod procedure;
pub mod quadratic;
pub mod simulation;

pub use error::{Error, Result};
