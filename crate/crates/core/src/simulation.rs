//! Monte Carlo Type I error and power studies on the canned populations.
//!
//! Scenario 1 compares `Dir(φ₀m)` with `0.3·Dir(6m) + 0.7·Dir(10m)`, where
//! `m = (4, 6, 8, 9)/27` and `φ₀ = 1`, so both populations share the mean `m`.
//! Alternatives move the fourth component of the single Dirichlet.
//!
//! Scenario 2 compares a logistic normal with
//! `0.3·Dir(0.483, 0.249, 0.163, 0.105) + 0.7·Dir(3.381, 1.743, 1.141, 0.735)`.
//! Alternatives move the first component of each mixture component.
//!
//! A shifted Dirichlet keeps its precision `∑α` and takes the shifted mean.
//!
//! Replicate `r` draws its two samples from streams `2r` and `2r + 1` of a
//! seed derived from the master seed. The draws do not depend on `δ`, so every
//! point of a power curve sees the same random numbers. Bootstrap seeds are
//! derived from `(master_seed, r, δ index)`. Results are independent of the
//! thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{BootstrapConfig, DEFAULT_REPLICATES};
use crate::compositional::{helmert_transform, Composition};
use crate::distributions::{
    mix_seed, DirichletMixture, DirichletParams, LogisticNormalParams, Population, RngStream,
};
use crate::procedure::{calibrate, observe, Calibration, CalibrationKind, Procedure, TestKind};
use crate::{Error, Result};

pub const NOMINAL_ALPHA: f64 = 0.05;
pub const DEFAULT_REPS: usize = 1000;

const SAMPLE_LABEL: u64 = 0x5341_4d50;
const BOOT_LABEL: u64 = 0x424f_4f54;

/// `±0.03, ±0.06, …, ±0.21`, in increasing order.
pub fn default_delta_grid() -> Vec<f64> {
    (-7i32..=7)
        .filter(|&k| k != 0)
        .map(|k| k as f64 * 3.0 / 100.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Scenario {
    pub fn id(self) -> u8 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
        }
    }

    /// Component moved by `+δ`.
    pub fn target_component(self) -> usize {
        match self {
            Scenario::One => 3,
            Scenario::Two => 0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            _ => Err(Error::InvalidParameter(format!(
                "scenario must be 1 or 2, got {id}"
            ))),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| Error::InvalidParameter(format!("scenario must be 1 or 2, got {s:?}")))
            .and_then(Scenario::try_from)
    }
}

/// Moves component `scenario.target_component()` by `+δ` and every other
/// component by `−δ/(D−1)`.
pub fn shift_mean(mu: &Composition, delta: f64, scenario: Scenario) -> Result<Composition> {
    let parts = mu.parts();
    let target = scenario.target_component();
    if target >= parts {
        return Err(Error::InvalidDimension(format!(
            "component {} does not exist in a {parts}-part composition",
            target + 1
        )));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    if delta == 0.0 {
        return Ok(mu.clone());
    }
    let step = delta / (parts - 1) as f64;
    let mut out: Vec<f64> = mu.values().iter().map(|&m| m - step).collect();
    // Target absorbs the rounding so the parts sum to one.
    out[target] = 0.0;
    let rest: f64 = out.iter().sum();
    out[target] = 1.0 - rest;
    if let Some((i, v)) = out.iter().enumerate().find(|(_, &v)| v <= 0.0 || v >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} moves component {} to {v}",
            i + 1
        )));
    }
    Composition::new(out)
}

fn shift_dirichlet(p: &DirichletParams, delta: f64, scenario: Scenario) -> Result<DirichletParams> {
    let mean = shift_mean(&Composition::new(p.mean())?, delta, scenario)?;
    DirichletParams::from_mean(mean.values(), p.precision())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n1: usize,
    pub n2: usize,
    pub delta: f64,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, n1: usize, n2: usize) -> Self {
        Self {
            scenario,
            n1,
            n2,
            delta: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Common mean of the scenario-1 populations.
pub fn scenario1_mean() -> Vec<f64> {
    [4.0, 6.0, 8.0, 9.0].iter().map(|v| v / 27.0).collect()
}

fn scenario1_base() -> Result<(DirichletParams, DirichletMixture)> {
    let m = scenario1_mean();
    let single = DirichletParams::from_mean(&m, 1.0)?;
    let mixture = DirichletMixture::new(
        vec![0.3, 0.7],
        vec![
            DirichletParams::from_mean(&m, 6.0)?,
            DirichletParams::from_mean(&m, 10.0)?,
        ],
    )?;
    Ok((single, mixture))
}

fn scenario2_base() -> Result<(LogisticNormalParams, DirichletMixture)> {
    let sigma = DMatrix::from_row_slice(
        3,
        3,
        &[0.083, 0.185, -0.169, 0.185, 0.547, -0.671, -0.169, -0.671, 1.110],
    );
    let ln = LogisticNormalParams::new(vec![1.548, 0.747, -0.052], sigma)?;
    let mixture = DirichletMixture::new(
        vec![0.3, 0.7],
        vec![
            DirichletParams::new(vec![0.483, 0.249, 0.163, 0.105])?,
            DirichletParams::new(vec![3.381, 1.743, 1.141, 0.735])?,
        ],
    )?;
    Ok((ln, mixture))
}

/// The two populations of `cfg`, with the alternative applied.
pub fn scenario_populations(cfg: &ScenarioConfig) -> Result<(Population, Population)> {
    let delta = cfg.delta;
    match cfg.scenario {
        Scenario::One => {
            let (single, mixture) = scenario1_base()?;
            let shifted = shift_dirichlet(&single, delta, cfg.scenario)?;
            Ok((Population::Dirichlet(shifted), Population::Mixture(mixture)))
        }
        Scenario::Two => {
            let (ln, mixture) = scenario2_base()?;
            let comps = mixture
                .components()
                .iter()
                .map(|c| shift_dirichlet(c, delta, cfg.scenario))
                .collect::<Result<Vec<_>>>()?;
            let shifted = DirichletMixture::new(mixture.weights().to_vec(), comps)?;
            Ok((Population::LogisticNormal(ln), Population::Mixture(shifted)))
        }
    }
}

/// Normal-approximation 95% interval `p ± 1.96·√(p(1−p)/reps)`.
pub fn mc_confidence_interval(p: f64, reps: usize) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    let half = 1.96 * (p * (1.0 - p) / reps as f64).sqrt();
    Ok((p - half, p + half))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub reps: usize,
    pub alpha: f64,
    pub bootstrap_replicates: usize,
    pub master_seed: u64,
    /// Worker cap; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            reps: DEFAULT_REPS,
            alpha: NOMINAL_ALPHA,
            bootstrap_replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Type1,
    Power,
}

/// One (procedure, δ) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub label: String,
    pub test: TestKind,
    pub calibration: CalibrationKind,
    pub delta: f64,
    pub n1: usize,
    pub n2: usize,
    pub reps: usize,
    /// Bootstrap replicates; zero for analytic calibrations.
    pub b: usize,
    pub seed: u64,
    pub successes: usize,
    pub failures: usize,
    pub rejections: usize,
    /// `rejections / successes`.
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Type I cells: whether `estimate` lies in the interval around α.
    pub within_ci: Option<bool>,
}

/// Output of a study. Timing is kept out so that serialised reports are
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub scenario: Scenario,
    pub n1: usize,
    pub n2: usize,
    pub options: StudyOptions,
    pub cells: Vec<StudyCell>,
}

pub const CSV_HEADER: [&str; 18] = [
    "scenario",
    "label",
    "test",
    "calibration",
    "delta",
    "n1",
    "n2",
    "reps",
    "B",
    "seed",
    "alpha",
    "successes",
    "failures",
    "rejections",
    "estimate",
    "ci_low",
    "ci_high",
    "within_ci",
];

impl StudyReport {
    pub fn cell(&self, procedure: Procedure, delta: f64) -> Option<&StudyCell> {
        self.cells.iter().find(|c| {
            c.test == procedure.test
                && c.calibration == procedure.calibration
                && (c.delta - delta).abs() < 1e-12
        })
    }

    /// Rejection rate against δ for each procedure, sorted by δ.
    pub fn series(&self) -> BTreeMap<String, Vec<(f64, f64)>> {
        let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for c in &self.cells {
            out.entry(c.label.clone())
                .or_default()
                .push((c.delta, c.estimate));
        }
        for v in out.values_mut() {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for c in &self.cells {
            w.write_record([
                self.scenario.to_string(),
                c.label.clone(),
                c.test.to_string(),
                c.calibration.to_string(),
                format!("{:.2}", c.delta),
                c.n1.to_string(),
                c.n2.to_string(),
                c.reps.to_string(),
                c.b.to_string(),
                c.seed.to_string(),
                self.options.alpha.to_string(),
                c.successes.to_string(),
                c.failures.to_string(),
                c.rejections.to_string(),
                format!("{:.4}", c.estimate),
                format!("{:.4}", c.ci_low),
                format!("{:.4}", c.ci_high),
                c.within_ci.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Two-column `delta,estimate` series for one procedure.
    pub fn write_series<W: Write>(&self, label: &str, mut writer: W) -> Result<()> {
        writeln!(writer, "delta,estimate")?;
        if let Some(points) = self.series().get(label) {
            for (d, p) in points {
                writeln!(writer, "{d:.2},{p:.4}")?;
            }
        }
        Ok(())
    }

    /// Plain-text table, one row per cell.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "scenario {}  n1={} n2={}  reps={} B={} seed={} alpha={}\n",
            self.scenario,
            self.n1,
            self.n2,
            self.options.reps,
            self.options.bootstrap_replicates,
            self.options.master_seed,
            self.options.alpha
        );
        s.push_str(&format!(
            "{:<26} {:>7} {:>9} {:>19} {:>8} {:>6}\n",
            "procedure", "delta", "estimate", "95% CI", "failures", "in CI"
        ));
        for c in &self.cells {
            s.push_str(&format!(
                "{:<26} {:>7.2} {:>9.3} {:>19} {:>8} {:>6}\n",
                c.label,
                c.delta,
                c.estimate,
                format!("({:.4}, {:.4})", c.ci_low, c.ci_high),
                c.failures,
                c.within_ci.map_or("-", |b| if b { "yes" } else { "no" }),
            ));
        }
        s
    }
}

#[derive(Clone, Copy)]
enum Outcome {
    Reject,
    Accept,
    Failed,
}

fn check_inputs(cfg: &ScenarioConfig, procedures: &[Procedure], opts: &StudyOptions) -> Result<()> {
    if opts.reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    if procedures.is_empty() {
        return Err(Error::InvalidParameter("no procedures requested".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {} must lie in (0, 1)",
            opts.alpha
        )));
    }
    if opts.threads == Some(0) {
        return Err(Error::InvalidParameter("threads must be positive".into()));
    }
    for p in procedures {
        Procedure::new(p.test, p.calibration)?;
    }
    let d = 3;
    if cfg.n1 <= d || cfg.n2 <= d {
        return Err(Error::InsufficientData {
            needed: d + 1,
            have: cfg.n1.min(cfg.n2),
        });
    }
    Ok(())
}

/// Runs every procedure on the same replicates for each `δ` in `deltas`.
fn run_study(
    kind: StudyKind,
    cfg: &ScenarioConfig,
    procedures: &[Procedure],
    deltas: &[f64],
    opts: &StudyOptions,
) -> Result<StudyReport> {
    check_inputs(cfg, procedures, opts)?;
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    let populations = deltas
        .iter()
        .map(|&d| scenario_populations(&cfg.with_delta(d)))
        .collect::<Result<Vec<_>>>()?;

    // Tests in a stable order with the calibrations requested for each.
    let mut by_test: BTreeMap<TestKind, Vec<(usize, CalibrationKind)>> = BTreeMap::new();
    for (i, p) in procedures.iter().enumerate() {
        by_test.entry(p.test).or_default().push((i, p.calibration));
    }
    let sample_seed = mix_seed(opts.master_seed, &[SAMPLE_LABEL]);

    let one_rep = |(k, r): (usize, usize)| -> Result<Vec<Outcome>> {
        let (pop1, pop2) = &populations[k];
        let x1 = pop1.sample(cfg.n1, &mut RngStream::new(sample_seed, 2 * r as u64).rng())?;
        let x2 = pop2.sample(cfg.n2, &mut RngStream::new(sample_seed, 2 * r as u64 + 1).rng())?;
        let (y1, y2) = (helmert_transform(&x1), helmert_transform(&x2));
        let boot = BootstrapConfig {
            replicates: opts.bootstrap_replicates,
            master_seed: mix_seed(opts.master_seed, &[BOOT_LABEL, r as u64, k as u64]),
            max_parallelism: Some(1),
            ..BootstrapConfig::default()
        };
        let mut out = vec![Outcome::Failed; procedures.len()];
        for (&test, cals) in &by_test {
            let Ok(obs) = observe(test, &y1, &y2) else {
                continue;
            };
            for &(i, cal) in cals {
                out[i] = match calibrate(&obs, &Calibration::from_kind(cal, &boot), &y1, &y2) {
                    Ok(res) if res.p_value.is_finite() => {
                        if res.p_value < opts.alpha {
                            Outcome::Reject
                        } else {
                            Outcome::Accept
                        }
                    }
                    _ => Outcome::Failed,
                };
            }
        }
        Ok(out)
    };

    let jobs: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|k| (0..opts.reps).map(move |r| (k, r)))
        .collect();
    let run_all = || jobs.par_iter().copied().map(one_rep).collect::<Result<Vec<_>>>();
    let outcomes = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };

    let mut cells = Vec::with_capacity(procedures.len() * deltas.len());
    for (i, p) in procedures.iter().enumerate() {
        for (k, &delta) in deltas.iter().enumerate() {
            let slice = &outcomes[k * opts.reps..(k + 1) * opts.reps];
            let count = |f: fn(&Outcome) -> bool| slice.iter().filter(|o| f(&o[i])).count();
            let rejections = count(|o| matches!(o, Outcome::Reject));
            let failures = count(|o| matches!(o, Outcome::Failed));
            let successes = opts.reps - failures;
            let estimate = if successes > 0 {
                rejections as f64 / successes as f64
            } else {
                f64::NAN
            };
            let (ci_low, ci_high, within_ci) = match kind {
                StudyKind::Type1 => {
                    let (lo, hi) = mc_confidence_interval(opts.alpha, opts.reps)?;
                    (lo, hi, Some(estimate > lo && estimate < hi))
                }
                StudyKind::Power => {
                    let (lo, hi) =
                        mc_confidence_interval(estimate, successes.max(1)).unwrap_or((estimate, estimate));
                    (lo, hi, None)
                }
            };
            let b = if p.calibration == CalibrationKind::Bootstrap {
                opts.bootstrap_replicates
            } else {
                0
            };
            cells.push(StudyCell {
                label: p.label(),
                test: p.test,
                calibration: p.calibration,
                delta,
                n1: cfg.n1,
                n2: cfg.n2,
                reps: opts.reps,
                b,
                seed: opts.master_seed,
                successes,
                failures,
                rejections,
                estimate,
                ci_low,
                ci_high,
                within_ci,
            });
        }
    }
    Ok(StudyReport {
        kind,
        scenario: cfg.scenario,
        n1: cfg.n1,
        n2: cfg.n2,
        options: opts.clone(),
        cells,
    })
}

/// Rejection rates under the null (`cfg.delta` is ignored).
pub fn run_type1_study(
    cfg: &ScenarioConfig,
    procedures: &[Procedure],
    opts: &StudyOptions,
) -> Result<StudyReport> {
    run_study(StudyKind::Type1, cfg, procedures, &[0.0], opts)
}

/// Rejection rates along `deltas`, using the same replicates at every point.
pub fn run_power_study(
    cfg: &ScenarioConfig,
    procedures: &[Procedure],
    deltas: &[f64],
    opts: &StudyOptions,
) -> Result<StudyReport> {
    run_study(StudyKind::Power, cfg, procedures, deltas, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_has_fourteen_symmetric_points() {
        let g = default_delta_grid();
        assert_eq!(g.len(), 14);
        assert_abs_diff_eq!(g[0], -0.21, epsilon = 1e-15);
        assert_abs_diff_eq!(g[13], 0.21, epsilon = 1e-15);
        for w in g.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn shift_examples() {
        let mu = Composition::new(vec![0.148, 0.222, 0.296, 0.334]).unwrap();
        let s = shift_mean(&mu, 0.03, Scenario::One).unwrap();
        let expect = [0.138, 0.212, 0.286, 0.364];
        for (a, b) in s.values().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let z = shift_mean(&mu, 0.0, Scenario::Two).unwrap();
        assert_eq!(z.values(), mu.values());
        let s2 = shift_mean(&mu, 0.09, Scenario::Two).unwrap();
        assert_abs_diff_eq!(s2.values()[0], 0.238, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.values()[3], 0.304, epsilon = 1e-12);
    }

    #[test]
    fn shift_rejects_leaving_the_simplex() {
        let mu = Composition::new(vec![0.05, 0.05, 0.1, 0.8]).unwrap();
        assert!(shift_mean(&mu, 0.21, Scenario::One).is_err());
        assert!(shift_mean(&mu, f64::NAN, Scenario::One).is_err());
    }

    #[test]
    fn grid_shifts_sum_to_one() {
        let mu = Composition::new(scenario1_mean()).unwrap();
        for d in default_delta_grid() {
            let s = shift_mean(&mu, d, Scenario::One).unwrap();
            assert_abs_diff_eq!(s.values().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn scenario1_parameters_match_the_rounded_constants() {
        let (single, mix) = scenario1_base().unwrap();
        let rounded = |v: &[f64]| {
            v.iter()
                .map(|x| (x * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        };
        assert_eq!(rounded(single.alpha()), vec![0.148, 0.222, 0.296, 0.333]);
        assert_eq!(
            rounded(mix.components()[0].alpha()),
            vec![0.889, 1.333, 1.778, 2.0]
        );
        assert_eq!(
            rounded(mix.components()[1].alpha()),
            vec![1.481, 2.222, 2.963, 3.333]
        );
    }

    #[test]
    fn null_populations_share_means() {
        let (p1, p2) = scenario_populations(&ScenarioConfig::new(Scenario::One, 10, 10)).unwrap();
        let (m1, m2) = (p1.mean().unwrap(), p2.mean().unwrap());
        for ((a, b), c) in m1.iter().zip(&m2).zip(scenario1_mean()) {
            assert_abs_diff_eq!(*a, c, epsilon = 1e-15);
            assert_abs_diff_eq!(*b, c, epsilon = 1e-15);
        }
        let (_, q2) = scenario_populations(&ScenarioConfig::new(Scenario::Two, 10, 10)).unwrap();
        // 0.3·α₁/1 + 0.7·α₂/7
        let oracle = [0.483, 0.249, 0.163, 0.105];
        for (a, b) in q2.mean().unwrap().iter().zip(oracle) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn shifted_population_keeps_precision() {
        let cfg = ScenarioConfig::new(Scenario::One, 10, 10).with_delta(-0.12);
        let (p1, _) = scenario_populations(&cfg).unwrap();
        let Population::Dirichlet(d) = p1 else { panic!() };
        assert_abs_diff_eq!(d.precision(), 1.0, epsilon = 1e-12);
        let (_, p2) =
            scenario_populations(&ScenarioConfig::new(Scenario::Two, 10, 10).with_delta(0.06)).unwrap();
        let Population::Mixture(m) = p2 else { panic!() };
        assert_abs_diff_eq!(m.components()[0].precision(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.components()[1].precision(), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mean()[0], 0.543, epsilon = 1e-12);
    }

    #[test]
    fn table_one_intervals() {
        let (lo, hi) = mc_confidence_interval(0.05, 1000).unwrap();
        assert_abs_diff_eq!(lo, 0.0365, epsilon = 5e-5);
        assert_abs_diff_eq!(hi, 0.0635, epsilon = 5e-5);
        let (lo, hi) = mc_confidence_interval(0.5, 1000).unwrap();
        assert_abs_diff_eq!(lo, 0.469, epsilon = 5e-4);
        assert_abs_diff_eq!(hi, 0.531, epsilon = 5e-4);
        let (lo, hi) = mc_confidence_interval(0.5, 100_000_000).unwrap();
        assert!(hi - lo < 1e-3);
        assert!(mc_confidence_interval(0.0, 10).is_err());
        assert!(mc_confidence_interval(0.5, 0).is_err());
    }

    #[test]
    fn single_rep_gives_zero_or_one() {
        let opts = StudyOptions {
            reps: 1,
            master_seed: 9,
            ..StudyOptions::default()
        };
        let p = Procedure::new(TestKind::James, CalibrationKind::F).unwrap();
        let r = run_type1_study(&ScenarioConfig::new(Scenario::One, 20, 20), &[p], &opts).unwrap();
        let e = r.cells[0].estimate;
        assert!(e == 0.0 || e == 1.0);
    }

    #[test]
    fn study_is_thread_count_invariant() {
        let procs = [
            Procedure::new(TestKind::Hotelling, CalibrationKind::F).unwrap(),
            Procedure::new(TestKind::James, CalibrationKind::Bootstrap).unwrap(),
        ];
        let cfg = ScenarioConfig::new(Scenario::Two, 12, 14);
        let mut opts = StudyOptions {
            reps: 12,
            bootstrap_replicates: 19,
            master_seed: 4,
            threads: Some(1),
            ..StudyOptions::default()
        };
        let a = run_power_study(&cfg, &procs, &[-0.06, 0.0, 0.06], &opts).unwrap();
        opts.threads = Some(3);
        let b = run_power_study(&cfg, &procs, &[-0.06, 0.0, 0.06], &opts).unwrap();
        assert_eq!(a.cells, b.cells);
        for c in &a.cells {
            assert!(c.rejections <= c.successes);
            assert_eq!(c.successes + c.failures, c.reps);
        }
    }

    #[test]
    fn zero_reps_rejected() {
        let opts = StudyOptions {
            reps: 0,
            ..StudyOptions::default()
        };
        let p = Procedure::new(TestKind::James, CalibrationKind::F).unwrap();
        assert!(run_type1_study(&ScenarioConfig::new(Scenario::One, 20, 20), &[p], &opts).is_err());
    }
}
