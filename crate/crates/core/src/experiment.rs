//! Experiment orchestration: run batches of trials, one record per trial.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{theoretical_k, BallGeometry, Dimension};
use crate::chords::{mc_mean_chord, ChordMethod};
use crate::error::{ensure_positive, Error, Result};
use crate::manifold_s2::{cap_mean_chord, s2_walk_trial, CapSpec, S2WalkConfig};
use crate::sampling::{mix64, RngStream, SampleMode};
use crate::walker::{run_trial, WalkConfig, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Rescattering walk in the ball; reproduces the K table.
    BallWalk,
    /// Monte Carlo parallel-class chords.
    Chords,
    /// Billiard walk; mean in-region path against the mean chord.
    Equivalence,
    /// Great-circle walk across a polar cap of the 2-sphere.
    S2Cap,
    /// Rescattering walk whose hit count is inverted for the walker speed.
    Speed,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::BallWalk, Mode::Chords, Mode::Equivalence, Mode::S2Cap, Mode::Speed];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::BallWalk => "ball_walk",
            Mode::Chords => "chords",
            Mode::Equivalence => "equivalence",
            Mode::S2Cap => "s2_cap",
            Mode::Speed => "speed",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Table,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "table" => Ok(OutputFormat::Table),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

/// A batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dims: Vec<Dimension>,
    pub trials: u32,
    pub walkers: u64,
    pub steps: u64,
    pub dt: f64,
    pub radius: f64,
    /// Cap colatitude; required by [`Mode::S2Cap`].
    pub theta: Option<f64>,
    pub seed: u64,
    pub sample_mode: SampleMode,
    /// Threads used inside each trial.
    pub workers: usize,
    pub output: OutputFormat,
    /// Record wall-clock times. Off by default so that output is reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::BallWalk,
            dims: (1..=10).map(|n| Dimension::new(n).expect("in range")).collect(),
            trials: 20,
            walkers: 20_000,
            steps: 2_000,
            dt: 0.01,
            radius: 1.0,
            theta: None,
            seed: 1993,
            sample_mode: SampleMode::Direct,
            workers: 1,
            output: OutputFormat::Csv,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("radius", self.radius)?;
        ensure_positive("dt", self.dt)?;
        if self.walkers == 0 {
            return Err(Error::Config("walkers must be positive".into()));
        }
        if self.steps == 0 && self.mode != Mode::Chords {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        if self.mode == Mode::S2Cap {
            let theta = self
                .theta
                .ok_or_else(|| Error::Config("s2_cap mode requires --theta".into()))?;
            let cap = CapSpec::new(self.radius, theta)?;
            if self.dt >= self.radius * cap.theta / 10.0 {
                return Err(Error::Config(format!(
                    "dt {} must be below radius·theta/10 = {}",
                    self.dt,
                    self.radius * theta / 10.0
                )));
            }
            return Ok(());
        }
        if self.dims.is_empty() {
            return Err(Error::Config("at least one dimension is required".into()));
        }
        if self.dt >= self.radius / 10.0 {
            return Err(Error::Config(format!(
                "dt {} must be below radius/10 = {}",
                self.dt,
                self.radius / 10.0
            )));
        }
        for &d in &self.dims {
            self.sample_mode.check(d)?;
        }
        Ok(())
    }

    fn walk_config(&self, dim: Dimension, seed: u64, rescatter: bool) -> WalkConfig {
        WalkConfig {
            dim,
            radius: self.radius,
            dt: self.dt,
            steps: self.steps,
            walkers: self.walkers,
            seed,
            mode: self.sample_mode,
            rescatter,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Seed of one trial, a pure function of the batch seed, the dimension and
/// the trial index.
pub fn trial_seed(seed: u64, dimension: u32, trial: u32) -> u64 {
    let key = (u64::from(dimension) << 32) | u64::from(trial);
    mix64(seed ^ mix64(key))
}

/// One row of the output table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub mode: Mode,
    pub dimension: u32,
    pub trial: u32,
    pub walkers: u64,
    pub steps: u64,
    pub dt: f64,
    pub radius: f64,
    /// The derived per-trial seed.
    pub seed: u64,
    pub hits: u64,
    pub k_hat: f64,
    pub k_theory: f64,
    pub rel_err: f64,
    pub mean_path_hat: Option<f64>,
    pub mean_chord_theory: f64,
    pub wall_time_s: f64,
    /// Recovered walker speed, speed mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_hat: Option<f64>,
}

impl TrialRecord {
    fn new(cfg: &ExperimentConfig, dimension: u32, trial: u32, seed: u64, hits: u64, k_hat: f64, k_theory: f64) -> Self {
        TrialRecord {
            mode: cfg.mode,
            dimension,
            trial,
            walkers: cfg.walkers,
            steps: cfg.steps,
            dt: cfg.dt,
            radius: cfg.radius,
            seed,
            hits,
            k_hat,
            k_theory,
            rel_err: (k_hat - k_theory).abs() / k_theory,
            mean_path_hat: None,
            mean_chord_theory: 0.0,
            wall_time_s: 0.0,
            speed_hat: None,
        }
    }
}

/// Runs every `(dimension, trial)` of the batch in order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;

    let dims: Vec<u32> = match config.mode {
        Mode::S2Cap => vec![2],
        _ => config.dims.iter().map(|d| d.get()).collect(),
    };
    let mut records = Vec::with_capacity(dims.len() * config.trials as usize);
    for &dim in &dims {
        for trial in 0..config.trials {
            let seed = trial_seed(config.seed, dim, trial);
            let started = Instant::now();
            let mut record = pool.install(|| run_one(config, dim, trial, seed))?;
            if config.timing {
                record.wall_time_s = started.elapsed().as_secs_f64();
            }
            records.push(record);
        }
    }
    Ok(records)
}

fn run_one(cfg: &ExperimentConfig, dim: u32, trial: u32, seed: u64) -> Result<TrialRecord> {
    if cfg.mode == Mode::S2Cap {
        let cap = CapSpec::new(cfg.radius, cfg.theta.expect("validated"))?;
        let walk = S2WalkConfig {
            dt: cfg.dt,
            steps: cfg.steps,
            walkers: cfg.walkers,
            ..S2WalkConfig::desk(cap, seed)
        };
        let stats = s2_walk_trial(&walk)?;
        let k_hat = stats.k_hat.ok_or_else(|| Error::Undefined("empty cap trial".into()))?;
        let mut rec = TrialRecord::new(cfg, 2, trial, seed, stats.entries, k_hat, 1.0 / PI);
        rec.mean_path_hat = stats.empirical_mean_path();
        rec.mean_chord_theory = cap_mean_chord(&cap);
        return Ok(rec);
    }

    let d = Dimension::new(dim)?;
    let geom = BallGeometry::new(d, cfg.radius)?;
    let k_theory = theoretical_k(d);
    let mut rec = match cfg.mode {
        Mode::Chords => {
            let mut rng = RngStream::new(seed, 0).rng();
            let stats = mc_mean_chord(&geom, ChordMethod::ParallelClass, cfg.walkers, &mut rng)?;
            let k_hat = geom.volume / (geom.surface_area * stats.mean);
            let mut rec = TrialRecord::new(cfg, dim, trial, seed, stats.samples, k_hat, k_theory);
            rec.mean_path_hat = Some(stats.mean);
            rec
        }
        Mode::BallWalk | Mode::Speed | Mode::Equivalence => {
            let rescatter = cfg.mode != Mode::Equivalence;
            let stats = run_trial(&cfg.walk_config(d, seed, rescatter))?;
            let k_hat = stats.k_hat.ok_or_else(|| Error::Undefined("empty walk".into()))?;
            let mut rec = TrialRecord::new(cfg, dim, trial, seed, stats.boundary_hits, k_hat, k_theory);
            rec.mean_path_hat = if rescatter { stats.mean_path_hat } else { stats.empirical_mean_path() };
            if cfg.mode == Mode::Speed && stats.boundary_hits > 0 {
                rec.speed_hat = Some(estimate_speed(&SpeedEstimateInput {
                    m: stats.boundary_hits as f64,
                    rho: cfg.walkers as f64 / geom.volume,
                    area: geom.surface_area,
                    t: stats.total_time,
                    dimension: d,
                })?);
            }
            rec
        }
        Mode::S2Cap => unreachable!("handled above"),
    };
    rec.mean_chord_theory = geom.mean_chord;
    Ok(rec)
}

/// Observed trap data for the speed estimate `c = m / (K ρ A t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimateInput {
    /// Number of captures.
    pub m: f64,
    /// Number density.
    pub rho: f64,
    /// Effective trap area.
    pub area: f64,
    /// Observation time.
    pub t: f64,
    pub dimension: Dimension,
}

pub fn estimate_speed(input: &SpeedEstimateInput) -> Result<f64> {
    let m = ensure_positive("capture count", input.m)?;
    let rho = ensure_positive("density", input.rho)?;
    let area = ensure_positive("trap area", input.area)?;
    let t = ensure_positive("duration", input.t)?;
    Ok(m / (theoretical_k(input.dimension) * rho * area * t))
}
