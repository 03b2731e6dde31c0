//! Test selection, calibration choice and the uniform result record.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_with_observed, BootstrapConfig};
use crate::compositional::EuclideanSample;
use crate::distributions::{chi2_sf, f_sf};
use crate::quadratic::{
    hotelling_statistic, james_coefficients, james_pvalue_corrected_chi2, james_pvalue_f, james_statistic,
    krishnamoorthy_nu,
};
use crate::{eel, el, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Hotelling,
    James,
    El,
    Eel,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [TestKind::Hotelling, TestKind::James, TestKind::El, TestKind::Eel];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Hotelling => "Hotelling",
            TestKind::James => "James",
            TestKind::El => "EL",
            TestKind::Eel => "EEL",
        }
    }

    /// Whether the test can be referred to `kind`.
    pub fn supports(self, kind: CalibrationKind) -> bool {
        !(self == TestKind::Hotelling && kind == CalibrationKind::CorrectedChi2)
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hotelling" => Ok(TestKind::Hotelling),
            "james" => Ok(TestKind::James),
            "el" => Ok(TestKind::El),
            "eel" => Ok(TestKind::Eel),
            other => Err(Error::InvalidParameter(format!("unknown test {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationKind {
    F,
    Chi2,
    CorrectedChi2,
    Bootstrap,
}

impl CalibrationKind {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationKind::F => "F",
            CalibrationKind::Chi2 => "chi2",
            CalibrationKind::CorrectedChi2 => "corrected-chi2",
            CalibrationKind::Bootstrap => "bootstrap",
        }
    }
}

impl fmt::Display for CalibrationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CalibrationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" => Ok(CalibrationKind::F),
            "chi2" => Ok(CalibrationKind::Chi2),
            "corrected-chi2" | "corrected" => Ok(CalibrationKind::CorrectedChi2),
            "bootstrap" | "boot" => Ok(CalibrationKind::Bootstrap),
            other => Err(Error::InvalidParameter(format!("unknown calibration {other:?}"))),
        }
    }
}

/// Reference distribution, or bootstrap settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Calibration {
    /// Hotelling: `(n₁+n₂)d/(n₁+n₂−d+1) F(d, n₁+n₂−d+1)`; otherwise
    /// `νd/(ν−d+1) F(d, ν−d+1)` with the Krishnamoorthy–Yu `ν`.
    F,
    /// Plain `χ²_d`.
    Chi2,
    /// James' corrected χ² with `A`, `B` estimated from the samples.
    CorrectedChi2,
    Bootstrap(BootstrapConfig),
}

impl Calibration {
    pub fn kind(&self) -> CalibrationKind {
        match self {
            Calibration::F => CalibrationKind::F,
            Calibration::Chi2 => CalibrationKind::Chi2,
            Calibration::CorrectedChi2 => CalibrationKind::CorrectedChi2,
            Calibration::Bootstrap(_) => CalibrationKind::Bootstrap,
        }
    }

    pub fn from_kind(kind: CalibrationKind, bootstrap: &BootstrapConfig) -> Self {
        match kind {
            CalibrationKind::F => Calibration::F,
            CalibrationKind::Chi2 => Calibration::Chi2,
            CalibrationKind::CorrectedChi2 => Calibration::CorrectedChi2,
            CalibrationKind::Bootstrap => Calibration::Bootstrap(bootstrap.clone()),
        }
    }
}

/// A (test, calibration) pair, written `james:f` on the command line and
/// `James(F)` in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Procedure {
    pub test: TestKind,
    pub calibration: CalibrationKind,
}

impl Procedure {
    pub fn new(test: TestKind, calibration: CalibrationKind) -> Result<Self> {
        if !test.supports(calibration) {
            return Err(Error::InvalidParameter(format!(
                "{calibration} calibration is not available for {test}"
            )));
        }
        Ok(Self { test, calibration })
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.test, self.calibration)
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (t, c) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("expected test:calibration, got {s:?}")))?;
        Procedure::new(t.parse()?, c.parse()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullStatus {
    Inside,
    Outside { sample: usize },
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub hull_status: HullStatus,
    pub residual: f64,
    /// `‖n₁λ₁ + n₂λ₂‖`, the outer stationarity condition of EL.
    pub lambda_balance: Option<f64>,
    pub verified_minimum: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub successes: usize,
    pub failures: usize,
    pub seed: u64,
}

/// Outcome of any test under any calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub test: TestKind,
    pub calibration: CalibrationKind,
    pub statistic: f64,
    pub p_value: f64,
    pub aux: BTreeMap<String, f64>,
    pub solver: Option<SolverReport>,
    pub bootstrap: Option<BootstrapSummary>,
}

impl TestResult {
    pub fn procedure(&self) -> Procedure {
        Procedure {
            test: self.test,
            calibration: self.calibration,
        }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub type StatisticFn = fn(&EuclideanSample, &EuclideanSample) -> Result<f64>;

fn james_t2(s1: &EuclideanSample, s2: &EuclideanSample) -> Result<f64> {
    james_statistic(s1, s2).map(|j| j.t2)
}

/// The bare statistic of `test`, as resampled by the bootstrap.
pub fn statistic_fn(test: TestKind) -> StatisticFn {
    match test {
        TestKind::Hotelling => hotelling_statistic,
        TestKind::James => james_t2,
        TestKind::El => el::el_statistic,
        TestKind::Eel => eel::eel_two_sample_statistic,
    }
}

/// p-value of a James-type statistic (T²ᵤ, EL or EEL) under `calibration`.
pub fn calibrated_pvalue(
    statistic: f64,
    calibration: &Calibration,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    statistic_fn: &(dyn Fn(&EuclideanSample, &EuclideanSample) -> Result<f64> + Sync),
) -> Result<f64> {
    let mut aux = BTreeMap::new();
    match calibration {
        Calibration::Bootstrap(cfg) => {
            bootstrap_with_observed(statistic_fn, statistic, s1, s2, cfg).map(|o| o.p_value)
        }
        other => analytic_pvalue(statistic, other.kind(), s1, s2, &mut aux),
    }
}

fn analytic_pvalue(
    statistic: f64,
    kind: CalibrationKind,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
    aux: &mut BTreeMap<String, f64>,
) -> Result<f64> {
    let d = s1.dim();
    match kind {
        CalibrationKind::Chi2 => chi2_sf(statistic.max(0.0), d as f64),
        CalibrationKind::CorrectedChi2 => {
            let js = james_statistic(s1, s2)?;
            let (a, b) = james_coefficients(&js.s1_tilde, &js.s2_tilde, &js.s_tilde, js.n1, js.n2)?;
            aux.insert("A".into(), a);
            aux.insert("B".into(), b);
            james_pvalue_corrected_chi2(statistic, a, b, d)
        }
        CalibrationKind::F => {
            let js = james_statistic(s1, s2)?;
            let nu = krishnamoorthy_nu(&js.s1_tilde, &js.s2_tilde, &js.s_tilde, js.n1, js.n2)?;
            aux.insert("nu".into(), nu);
            james_pvalue_f(statistic, nu, d)
        }
        CalibrationKind::Bootstrap => unreachable!("handled by the caller"),
    }
}

/// A computed statistic awaiting calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub test: TestKind,
    pub statistic: f64,
    pub solver: Option<SolverReport>,
}

/// Computes the statistic of `test` once, so several calibrations can share it.
pub fn observe(test: TestKind, s1: &EuclideanSample, s2: &EuclideanSample) -> Result<Observation> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    let (statistic, solver) = match test {
        TestKind::Hotelling => (hotelling_statistic(s1, s2)?, None),
        TestKind::James => (james_t2(s1, s2)?, None),
        TestKind::El => {
            let fit = el::el_fit(s1, s2)?;
            (fit.statistic, Some(fit.report))
        }
        TestKind::Eel => {
            let sol = eel::eel_solve_lambda(s1, s2)?;
            let report = SolverReport {
                outer_iterations: sol.iterations,
                inner_iterations: 0,
                converged: true,
                hull_status: HullStatus::Inside,
                residual: sol.residual,
                lambda_balance: None,
                verified_minimum: None,
            };
            (eel::eel_statistic(&sol.weights), Some(report))
        }
    };
    Ok(Observation {
        test,
        statistic,
        solver,
    })
}

/// Refers an observed statistic to `calibration`.
pub fn calibrate(
    obs: &Observation,
    calibration: &Calibration,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
) -> Result<TestResult> {
    let test = obs.test;
    let kind = calibration.kind();
    Procedure::new(test, kind)?;
    let statistic = obs.statistic;
    let mut aux = BTreeMap::new();
    let mut bootstrap = None;
    let p_value = match calibration {
        Calibration::Bootstrap(cfg) => {
            let out = bootstrap_with_observed(&statistic_fn(test), statistic, s1, s2, cfg)?;
            bootstrap = Some(BootstrapSummary {
                replicates: cfg.replicates,
                successes: out.successes,
                failures: out.failures,
                seed: cfg.master_seed,
            });
            out.p_value
        }
        Calibration::F if test == TestKind::Hotelling => {
            let d = s1.dim() as f64;
            let n = (s1.len() + s2.len()) as f64;
            let df2 = n - d + 1.0;
            if df2 <= 0.0 {
                return Err(Error::CalibrationUndefined(format!(
                    "n1 + n2 - d + 1 = {df2} is not positive"
                )));
            }
            let scale = n * d / df2;
            aux.insert("df1".into(), d);
            aux.insert("df2".into(), df2);
            aux.insert("scale".into(), scale);
            f_sf(statistic / scale, d, df2)?
        }
        other => analytic_pvalue(statistic, other.kind(), s1, s2, &mut aux)?,
    };
    Ok(TestResult {
        test,
        calibration: kind,
        statistic,
        p_value: p_value.clamp(0.0, 1.0),
        aux,
        solver: obs.solver.clone(),
        bootstrap,
    })
}

/// Runs `test` on two Helmert-transformed samples under `calibration`.
pub fn run_test(
    test: TestKind,
    calibration: &Calibration,
    s1: &EuclideanSample,
    s2: &EuclideanSample,
) -> Result<TestResult> {
    Procedure::new(test, calibration.kind())?;
    calibrate(&observe(test, s1, s2)?, calibration, s1, s2)
}
