//! Random chords of an n-ball under the three classical measures, and the
//! comparison between walk paths and parallel-class chords.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{BallGeometry, MAX_DIM};
use crate::error::{Error, Result};
use crate::sampling::{fill_point_in_ball, fill_unit_direction, SampleMode};
use crate::walker::{run_trial, WalkConfig};

/// Number of histogram bins over `[0, 2r]`.
pub const HISTOGRAM_BINS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordMethod {
    /// Chords parallel to a fixed axis with the foot uniform on the central
    /// cross-section. Defined for every dimension.
    ParallelClass,
    /// Two independent uniform points on the circle. Planar only.
    Endpoints,
    /// Chord whose midpoint is uniform in the disk. Planar only.
    Midpoint,
}

impl ChordMethod {
    pub const ALL: [ChordMethod; 3] =
        [ChordMethod::ParallelClass, ChordMethod::Endpoints, ChordMethod::Midpoint];

    fn check(self, geom: &BallGeometry) -> Result<()> {
        if self != ChordMethod::ParallelClass && geom.dim.get() != 2 {
            return Err(Error::Config(format!(
                "chord method {self} is only defined in two dimensions, not {}",
                geom.dim
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ChordMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChordMethod::ParallelClass => "parallel_class",
            ChordMethod::Endpoints => "endpoints",
            ChordMethod::Midpoint => "midpoint",
        })
    }
}

impl FromStr for ChordMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ChordMethod::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown chord method `{s}`")))
    }
}

/// Length of the chord of the radius-`r` ball whose foot on the central
/// cross-section lies at distance `foot` from the centre.
#[inline]
pub fn parallel_chord_length(foot: f64, r: f64) -> f64 {
    2.0 * (r * r - foot * foot).max(0.0).sqrt()
}

/// Draws one chord length.
pub fn sample_chord<R: Rng + ?Sized>(geom: &BallGeometry, method: ChordMethod, rng: &mut R) -> Result<f64> {
    method.check(geom)?;
    Ok(draw(geom, method, rng))
}

fn draw<R: Rng + ?Sized>(geom: &BallGeometry, method: ChordMethod, rng: &mut R) -> f64 {
    let r = geom.radius;
    let n = geom.dim.as_usize();
    match method {
        // the 0-ball foot is a single point: every chord is the whole interval
        ChordMethod::ParallelClass if n == 1 => 2.0 * r,
        ChordMethod::ParallelClass => {
            let mut foot = [0.0f64; MAX_DIM];
            let foot = &mut foot[..n - 1];
            fill_point_in_ball(foot, r, SampleMode::Direct, rng);
            parallel_chord_length(foot.iter().map(|x| x * x).sum::<f64>().sqrt(), r)
        }
        ChordMethod::Endpoints => {
            let a = 2.0 * PI * rng.random::<f64>();
            let b = 2.0 * PI * rng.random::<f64>();
            2.0 * r * ((a - b).abs() / 2.0).sin()
        }
        ChordMethod::Midpoint => {
            let mut m = [0.0f64; 2];
            fill_point_in_ball(&mut m, r, SampleMode::Direct, rng);
            parallel_chord_length((m[0] * m[0] + m[1] * m[1]).sqrt(), r)
        }
    }
}

/// Monte Carlo summary of chord lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChordStats {
    pub method: ChordMethod,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Counts over [`HISTOGRAM_BINS`] equal bins of `[0, 2r]`.
    pub histogram: Vec<u64>,
}

#[derive(Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    // Welford
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn summarize(
    geom: &BallGeometry,
    method: ChordMethod,
    samples: u64,
    mut next: impl FnMut() -> f64,
) -> ChordStats {
    let mut moments = Moments::default();
    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    let width = 2.0 * geom.radius / HISTOGRAM_BINS as f64;
    for _ in 0..samples {
        let len = next();
        moments.push(len);
        let bin = ((len / width) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    ChordStats { method, samples, mean: moments.mean, stderr: moments.stderr(), histogram }
}

/// Monte Carlo mean chord length.
pub fn mc_mean_chord<R: Rng + ?Sized>(
    geom: &BallGeometry,
    method: ChordMethod,
    samples: u64,
    rng: &mut R,
) -> Result<ChordStats> {
    method.check(geom)?;
    if samples == 0 {
        return Err(Error::Config("at least one chord sample is required".into()));
    }
    Ok(summarize(geom, method, samples, || draw(geom, method, rng)))
}

/// Parallel-class chords along an arbitrary unit `axis`.
///
/// The foot is drawn uniformly on the cross-section orthogonal to `axis`
/// (built by Gram-Schmidt) and the chord is found by intersecting the line
/// `foot + t·axis` with the sphere.
pub fn mc_mean_chord_along<R: Rng + ?Sized>(
    geom: &BallGeometry,
    axis: &[f64],
    samples: u64,
    rng: &mut R,
) -> Result<ChordStats> {
    let n = geom.dim.as_usize();
    if axis.len() != n {
        return Err(Error::Config(format!("axis has {} components, expected {n}", axis.len())));
    }
    let a_norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if a_norm.is_nan() || a_norm <= 0.0 {
        return Err(Error::Config("axis must be nonzero".into()));
    }
    if samples == 0 {
        return Err(Error::Config("at least one chord sample is required".into()));
    }
    let u: Vec<f64> = axis.iter().map(|x| x / a_norm).collect();
    let basis = orthonormal_complement(&u);
    let r = geom.radius;
    let mut coeffs = vec![0.0; n.saturating_sub(1)];
    let mut foot = vec![0.0; n];
    Ok(summarize(geom, ChordMethod::ParallelClass, samples, || {
        fill_point_in_ball(&mut coeffs, r, SampleMode::Direct, rng);
        foot.iter_mut().for_each(|x| *x = 0.0);
        for (c, e) in coeffs.iter().zip(&basis) {
            for (f, ej) in foot.iter_mut().zip(e) {
                *f += c * ej;
            }
        }
        // |foot + t u|² = r² ⇒ t² + 2(f·u)t + |f|² - r² = 0
        let fu: f64 = foot.iter().zip(&u).map(|(a, b)| a * b).sum();
        let f2: f64 = foot.iter().map(|x| x * x).sum();
        2.0 * (fu * fu - f2 + r * r).max(0.0).sqrt()
    }))
}

fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut all = vec![u.to_vec()];
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in &all {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            v.iter_mut().for_each(|x| *x /= len);
            all.push(v.clone());
            basis.push(v);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// A uniformly random unit axis.
pub fn random_axis<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut a = vec![0.0; n];
    fill_unit_direction(&mut a, SampleMode::Direct, rng);
    a
}

/// Outcome of comparing walk paths with chord statistics for one ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub dim: u32,
    pub rescatter: bool,
    pub path_samples: u64,
    pub mean_path: f64,
    pub mean_path_stderr: f64,
    /// `V / (k_hat · A)` from the same run.
    pub flux_mean_path: f64,
    pub mc_chord_mean: f64,
    pub mc_chord_stderr: f64,
    pub analytic_chord: f64,
    /// `|mean_path - analytic| / analytic`.
    pub path_rel_dev: f64,
    /// `|mc_chord_mean - analytic| / analytic`.
    pub chord_rel_dev: f64,
    pub path_within_5se: bool,
    pub chord_within_5se: bool,
}

/// Runs a walk trial and compares its mean in-region path with the Monte
/// Carlo parallel-class chord mean and the analytic mean chord.
///
/// The chord estimate uses as many samples as the walk produced paths, drawn
/// from stream `walkers` of the trial seed (walker streams use `0..walkers`).
pub fn walk_chord_equivalence(config: &WalkConfig) -> Result<EquivalenceReport> {
    let stats = run_trial(config)?;
    let geom = stats.geometry;
    let (mean_path, path_se) = match (stats.empirical_mean_path(), stats.path_stderr()) {
        (Some(m), Some(se)) => (m, se),
        _ => {
            return Err(Error::InsufficientData(
                "no complete boundary-to-boundary path was observed".into(),
            ))
        }
    };
    let flux_mean_path = stats
        .mean_path_hat
        .ok_or_else(|| Error::InsufficientData("no boundary hits".into()))?;
    let samples = stats.in_region_path_samples.len() as u64;
    let mut rng = crate::sampling::RngStream::new(config.seed, config.walkers).rng();
    let chords = mc_mean_chord(&geom, ChordMethod::ParallelClass, samples, &mut rng)?;
    let analytic = geom.mean_chord;
    let path_dev = (mean_path - analytic).abs();
    let chord_dev = (chords.mean - analytic).abs();
    Ok(EquivalenceReport {
        dim: geom.dim.get(),
        rescatter: config.rescatter,
        path_samples: samples,
        mean_path,
        mean_path_stderr: path_se,
        flux_mean_path,
        mc_chord_mean: chords.mean,
        mc_chord_stderr: chords.stderr,
        analytic_chord: analytic,
        path_rel_dev: path_dev / analytic,
        chord_rel_dev: chord_dev / analytic,
        // a zero stderr (the 1-ball) only passes on an exact match
        path_within_5se: path_dev <= 5.0 * path_se + 1e-9 * analytic,
        chord_within_5se: chord_dev <= 5.0 * chords.stderr + 1e-12 * analytic,
    })
}
