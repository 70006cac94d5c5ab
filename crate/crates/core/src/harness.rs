//! Monte Carlo experiment driver.
//!
//! An [`ExperimentConfig`] names one of the synthetic study designs, a
//! parameter grid and a trial count. Every `(grid point, trial)` pair runs
//! generate → Rips persistence → summaries; the per-trial values are folded
//! into one [`CurvePoint`] per grid point and statistic.
//!
//! Trial `t` draws from the random stream `(experiment id, t)` at every grid
//! point, so neighbouring grid points see common random numbers. Trials run
//! in parallel; results are folded in trial order, so output does not depend
//! on scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barcode::{fmt_num, Barcode, PointCloud};
use crate::entropy;
use crate::error::{invalid, Error, Result};
use crate::rips::rips_persistence;
use crate::scalar::compensated_sum;
use crate::summaries;
use crate::synth::{self, GbmParams, RngSeed, TrialRng};

/// Volatility held fixed while the drift varies.
pub const DRIFT_SWEEP_SIGMA: f64 = 0.1;
/// Drift held fixed while the volatility varies.
pub const VOLATILITY_SWEEP_MU: f64 = 0.0;
/// Points in the Gaussian-noise experiment before perturbation.
pub const GAUSSIAN_BASE_POINTS: usize = 200;
/// Points on the circles in the outlier experiment; also the outlier scale.
pub const OUTLIER_BASE_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Equidistant points on disjoint circles of radii 1 and 1/4; the
    /// parameter is the point count on the large circle.
    DisjointCircles,
    /// Equidistant points on two intersecting unit circles; the parameter is
    /// the point count per circle.
    IntertwinedCircles,
    /// Uniform random points on the intersecting circles; the parameter is
    /// the total point count.
    SampledCircles,
    /// Gaussian perturbation of sampled intersecting circles; the parameter
    /// is the noise standard deviation.
    GaussianNoise,
    /// Uniform outliers added to sampled intersecting circles; the parameter
    /// is the outlier intensity in `[0, 1]`.
    UniformNoise,
    /// Delay embedding of a GBM path; the parameter is the volatility.
    GbmVolatility,
    /// Delay embedding of a GBM path; the parameter is the drift.
    GbmDrift,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::DisjointCircles,
        ExperimentKind::IntertwinedCircles,
        ExperimentKind::SampledCircles,
        ExperimentKind::GaussianNoise,
        ExperimentKind::UniformNoise,
        ExperimentKind::GbmVolatility,
        ExperimentKind::GbmDrift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DisjointCircles => "disjoint_circles",
            ExperimentKind::IntertwinedCircles => "intertwined_circles",
            ExperimentKind::SampledCircles => "sampled_circles",
            ExperimentKind::GaussianNoise => "gaussian_noise",
            ExperimentKind::UniformNoise => "uniform_noise",
            ExperimentKind::GbmVolatility => "gbm_volatility",
            ExperimentKind::GbmDrift => "gbm_drift",
        }
    }

    /// Stream identifier used to key the random generator.
    pub fn id(self) -> u32 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u32
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            ExperimentKind::DisjointCircles => vec![24.0, 48.0, 96.0],
            ExperimentKind::IntertwinedCircles => vec![12.0, 24.0, 48.0, 96.0, 192.0],
            ExperimentKind::SampledCircles => vec![25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0],
            ExperimentKind::GaussianNoise => vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            ExperimentKind::UniformNoise => vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            ExperimentKind::GbmVolatility => vec![0.05, 0.1, 0.2, 0.4, 0.8],
            ExperimentKind::GbmDrift => vec![-0.2, -0.1, 0.0, 0.1, 0.2],
        }
    }

    fn is_random(self) -> bool {
        !matches!(self, ExperimentKind::DisjointCircles | ExperimentKind::IntertwinedCircles)
    }

    fn check_parameter(self, p: f64) -> Result<()> {
        let count = |min: f64| {
            if p.fract() == 0.0 && p >= min && p <= u32::MAX as f64 {
                Ok(())
            } else {
                Err(invalid(format!("{}: parameter must be an integer >= {min}, got {p}", self.name())))
            }
        };
        match self {
            ExperimentKind::DisjointCircles => count(12.0),
            ExperimentKind::IntertwinedCircles => count(3.0),
            ExperimentKind::SampledCircles => count(2.0),
            ExperimentKind::GaussianNoise | ExperimentKind::GbmVolatility if !(p >= 0.0 && p.is_finite()) => {
                Err(invalid(format!("{}: parameter must be nonnegative, got {p}", self.name())))
            }
            ExperimentKind::UniformNoise if !(0.0..=1.0).contains(&p) => {
                Err(invalid(format!("{}: parameter must lie in [0, 1], got {p}", self.name())))
            }
            ExperimentKind::GbmDrift if !p.is_finite() => {
                Err(invalid(format!("{}: parameter must be finite, got {p}", self.name())))
            }
            _ => Ok(()),
        }
    }

    /// Point cloud for one trial at grid value `p`.
    pub fn generate(self, p: f64, rng: &mut TrialRng) -> Result<PointCloud<f64>> {
        self.check_parameter(p)?;
        match self {
            ExperimentKind::DisjointCircles => synth::disjoint_circles(p as usize),
            ExperimentKind::IntertwinedCircles => synth::intertwined_circles(p as usize),
            ExperimentKind::SampledCircles => synth::intertwined_circles_uniform(p as usize, rng),
            ExperimentKind::GaussianNoise => {
                let base = synth::intertwined_circles_uniform(GAUSSIAN_BASE_POINTS, rng)?;
                synth::add_gaussian_noise(&base, p, rng)
            }
            ExperimentKind::UniformNoise => {
                let base = synth::intertwined_circles_uniform(OUTLIER_BASE_POINTS, rng)?;
                synth::add_uniform_outliers(&base, p, OUTLIER_BASE_POINTS, rng)
            }
            ExperimentKind::GbmVolatility => {
                let params = GbmParams { mu: VOLATILITY_SWEEP_MU, sigma: p, ..GbmParams::default() };
                synth::takens_embed(&synth::gbm_path(&params, rng)?, synth::TAKENS_DIM, synth::TAKENS_TAU)
            }
            ExperimentKind::GbmDrift => {
                let params = GbmParams { mu: p, sigma: DRIFT_SWEEP_SIGMA, ..GbmParams::default() };
                synth::takens_embed(&synth::gbm_path(&params, rng)?, synth::TAKENS_DIM, synth::TAKENS_TAU)
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Tsi,
    Tsigi,
    Entropy,
    Cvtsi,
    CvtsiOverN,
}

impl Statistic {
    pub const ALL: [Statistic; 5] =
        [Statistic::Tsi, Statistic::Tsigi, Statistic::Entropy, Statistic::Cvtsi, Statistic::CvtsiOverN];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Tsi => "tsi",
            Statistic::Tsigi => "tsigi",
            Statistic::Entropy => "entropy",
            Statistic::Cvtsi => "cvtsi",
            Statistic::CvtsiOverN => "cvtsi_over_n",
        }
    }

    /// `None` when the statistic is undefined for `b`.
    pub fn evaluate(self, b: &Barcode<f64>) -> Option<f64> {
        match self {
            Statistic::Tsi => Some(summaries::tsi(b)),
            Statistic::Tsigi => summaries::tsigi(b).ok(),
            Statistic::Entropy => entropy::persistent_entropy(b).ok(),
            Statistic::Cvtsi => entropy::cvtsi(b).ok(),
            Statistic::CvtsiOverN => entropy::cvtsi_over_n(b).ok(),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown statistic `{s}`")))
    }
}

/// One Monte Carlo experiment.
///
/// In JSON, `parameter_grid` and `statistics` may be omitted to use the
/// experiment's default grid and all statistics; `degree` defaults to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct ExperimentConfig {
    pub name: ExperimentKind,
    pub parameter_grid: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
    pub degree: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: ExperimentKind,
    parameter_grid: Option<Vec<f64>>,
    trials: u32,
    seed: u64,
    statistics: Option<Vec<Statistic>>,
    #[serde(default = "default_degree")]
    degree: usize,
}

fn default_degree() -> usize {
    1
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let cfg = ExperimentConfig {
            parameter_grid: raw.parameter_grid.unwrap_or_else(|| raw.name.default_grid()),
            statistics: raw.statistics.unwrap_or_else(|| Statistic::ALL.to_vec()),
            name: raw.name,
            trials: raw.trials,
            seed: raw.seed,
            degree: raw.degree,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// Default grid and all statistics in degree 1.
    pub fn new(name: ExperimentKind, trials: u32, seed: u64) -> Self {
        ExperimentConfig {
            name,
            parameter_grid: name.default_grid(),
            trials,
            seed,
            statistics: Statistic::ALL.to_vec(),
            degree: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parameter_grid.is_empty() {
            return Err(invalid("parameter grid is empty"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.statistics.is_empty() {
            return Err(invalid("no statistics requested"));
        }
        if self.degree > 1 {
            return Err(invalid(format!("homology degree must be 0 or 1, got {}", self.degree)));
        }
        self.parameter_grid.iter().try_for_each(|&p| self.name.check_parameter(p))
    }
}

/// Aggregated value of one statistic at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub parameter: f64,
    pub statistic: Statistic,
    /// `None` when every trial was skipped.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Trials that produced a value.
    pub trials: usize,
    /// Trials where the statistic was undefined or the pipeline failed.
    pub skipped: usize,
}

/// Mean, `(n-1)`-normalized standard deviation (0 for one value) and count.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64, usize)> {
    let n = values.len();
    if n == 0 {
        return Err(invalid("cannot aggregate an empty sample"));
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (compensated_sum(values.iter().map(|&x| (x - mean) * (x - mean))) / (n - 1) as f64).sqrt()
    };
    Ok((mean, std, n))
}

/// Values of the requested statistics for one trial, in config order.
/// Pipeline failures make every statistic undefined.
pub fn run_trial(cfg: &ExperimentConfig, parameter: f64, trial: u32) -> Vec<Option<f64>> {
    let barcode = trial_barcode(cfg, parameter, trial);
    cfg.statistics
        .iter()
        .map(|s| barcode.as_ref().ok().and_then(|b| s.evaluate(b)))
        .collect()
}

/// Barcode of one trial in the configured degree.
pub fn trial_barcode(cfg: &ExperimentConfig, parameter: f64, trial: u32) -> Result<Barcode<f64>> {
    let mut rng = RngSeed(cfg.seed).trial(cfg.name.id(), trial);
    let pc = cfg.name.generate(parameter, &mut rng)?;
    let mut diagram = rips_persistence(&pc, cfg.degree, None)?;
    Ok(diagram.remove(&cfg.degree).unwrap_or_else(|| Barcode::empty(cfg.degree)))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    // deterministic designs give the same value in every trial
    let distinct = if cfg.name.is_random() { cfg.trials } else { 1 };
    let jobs: Vec<(f64, u32)> = cfg
        .parameter_grid
        .iter()
        .flat_map(|&p| (0..distinct).map(move |t| (p, t)))
        .collect();
    let results: Vec<Vec<Option<f64>>> = jobs.par_iter().map(|&(p, t)| run_trial(cfg, p, t)).collect();

    let mut out = Vec::with_capacity(cfg.parameter_grid.len() * cfg.statistics.len());
    for (g, &p) in cfg.parameter_grid.iter().enumerate() {
        let block = &results[g * distinct as usize..(g + 1) * distinct as usize];
        for (s, &stat) in cfg.statistics.iter().enumerate() {
            let mut values: Vec<f64> = block.iter().filter_map(|r| r[s]).collect();
            let mut skipped = block.len() - values.len();
            if !cfg.name.is_random() {
                let copies = cfg.trials as usize;
                skipped *= copies;
                values = values.into_iter().flat_map(|v| std::iter::repeat(v).take(copies)).collect();
            }
            let (mean, std, trials) = match aggregate(&values) {
                Ok((m, sd, k)) => (Some(m), Some(sd), k),
                Err(_) => (None, None, 0),
            };
            out.push(CurvePoint { parameter: p, statistic: stat, mean, std, trials, skipped });
        }
    }
    Ok(out)
}

pub const CURVE_CSV_HEADER: [&str; 7] = ["experiment", "parameter", "statistic", "mean", "std", "trials", "skipped"];

/// Writes curve points as CSV; undefined means and deviations are empty.
pub fn write_curve_csv<W: Write>(writer: W, kind: ExperimentKind, points: &[CurvePoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CURVE_CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for cp in points {
        wtr.write_record([
            kind.name().to_string(),
            fmt_num(cp.parameter),
            cp.statistic.name().to_string(),
            opt(cp.mean),
            opt(cp.std),
            cp.trials.to_string(),
            cp.skipped.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Mean curve of one statistic, in grid order.
pub fn curve(points: &[CurvePoint], stat: Statistic) -> Vec<(f64, Option<f64>)> {
    points.iter().filter(|cp| cp.statistic == stat).map(|cp| (cp.parameter, cp.mean)).collect()
}
