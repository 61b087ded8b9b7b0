//! Spherical caps on the 2-sphere and a geodesic walk that measures the flux
//! constant of the cap boundary.
//!
//! Walkers live on the whole sphere of radius `r`; the cap `{colatitude <= θ}`
//! is only a counting region. With uniform density `walkers / 4πr²` and unit
//! speed, entries into the cap per unit time are `K · ρ · L` with `L` the
//! boundary length, and on the sphere `K = 1/π` for every cap.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::sampling::{fill_unit_direction, RngStream, SampleMode};
use crate::walker::{Cluster, DEFAULT_BUDGET};

const CHUNK: u64 = 64;

/// The polar cap of colatitude `theta` on a sphere of radius `sphere_radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    pub sphere_radius: f64,
    pub theta: f64,
}

impl CapSpec {
    pub fn new(sphere_radius: f64, theta: f64) -> Result<Self> {
        ensure_positive("sphere radius", sphere_radius)?;
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::Domain(format!("cap colatitude {theta} must lie in (0, π/2]")));
        }
        Ok(CapSpec { sphere_radius, theta })
    }

    /// `cos θ`, exactly zero for the hemisphere.
    fn cos_theta(&self) -> f64 {
        if self.theta == FRAC_PI_2 {
            0.0
        } else {
            self.theta.cos()
        }
    }

    /// `1 - cos θ`, computed as `2 sin²(θ/2)` to keep small caps accurate.
    fn versine(&self) -> f64 {
        if self.theta == FRAC_PI_2 {
            1.0
        } else {
            let s = (self.theta / 2.0).sin();
            2.0 * s * s
        }
    }
}

/// Area of the cap, `2π r² (1 - cos θ)`.
pub fn cap_volume(cap: &CapSpec) -> f64 {
    let r = cap.sphere_radius;
    TAU * r * r * cap.versine()
}

/// Length of the cap boundary, `2π r sin θ`.
pub fn cap_boundary_length(cap: &CapSpec) -> f64 {
    TAU * cap.sphere_radius * cap.theta.sin()
}

/// Mean geodesic chord of the cap, `π r (1 - cos θ) / sin θ`.
pub fn cap_mean_chord(cap: &CapSpec) -> f64 {
    PI * cap.sphere_radius * cap.versine() / cap.theta.sin()
}

/// Length of the arc of a great circle inside the cap, where `psi` is the
/// angle between the great circle's pole and the cap axis.
///
/// Points of the circle have axial coordinate `sin ψ · cos φ`; the arc is
/// where that exceeds `cos θ`, so its length is `2r·acos(cos θ / sin ψ)`.
pub fn geodesic_chord_length(psi: f64, cap: &CapSpec) -> f64 {
    let s = psi.sin().abs();
    let c = cap.cos_theta();
    if s > 0.0 && s >= c {
        2.0 * cap.sphere_radius * (c / s).min(1.0).acos()
    } else {
        0.0
    }
}

#[inline]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn normalize3(v: &mut [f64; 3]) {
    let inv = 1.0 / dot3(v, v).sqrt();
    v.iter_mut().for_each(|x| *x *= inv);
}

/// A point on the unit sphere and a unit tangent heading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S2WalkerState {
    pub position: [f64; 3],
    pub heading: [f64; 3],
}

impl S2WalkerState {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut position = [0.0; 3];
        fill_unit_direction(&mut position, SampleMode::Direct, rng);
        let mut state = S2WalkerState { position, heading: [0.0; 3] };
        state.resample_heading(rng);
        state
    }

    /// Uniform heading in the tangent plane at the current position.
    pub fn resample_heading<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        loop {
            let mut g: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let along = dot3(&g, &self.position);
            g.iter_mut().zip(&self.position).for_each(|(x, p)| *x -= along * p);
            if dot3(&g, &g) > 1e-20 {
                normalize3(&mut g);
                self.heading = g;
                return;
            }
        }
    }

    /// Moves `angle` radians along the great circle of the current heading.
    pub fn advance(&mut self, angle: f64) {
        let (s, c) = angle.sin_cos();
        let (p, h) = (self.position, self.heading);
        let mut np = [0.0; 3];
        let mut nh = [0.0; 3];
        for j in 0..3 {
            np[j] = p[j] * c + h[j] * s;
            nh[j] = h[j] * c - p[j] * s;
        }
        normalize3(&mut np);
        let along = dot3(&nh, &np);
        nh.iter_mut().zip(&np).for_each(|(x, q)| *x -= along * q);
        normalize3(&mut nh);
        self.position = np;
        self.heading = nh;
    }
}

/// A boundary crossing along a step, at arc angle `at` from the step start.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Crossing {
    at: f64,
    entering: bool,
}

/// Cap-boundary crossings in `(0, angle]` along the great circle leaving the
/// state's position. The axial coordinate along the arc is
/// `z(φ) = R cos(φ - φ0)`; crossings are the roots of `z(φ) = cos θ`.
fn crossings(state: &S2WalkerState, angle: f64, cos_theta: f64) -> ([Crossing; 2], usize) {
    let (z0, hz) = (state.position[2], state.heading[2]);
    let amp = z0.hypot(hz);
    let mut out = [Crossing { at: 0.0, entering: false }; 2];
    if amp == 0.0 || amp < cos_theta {
        return (out, 0);
    }
    let phase = hz.atan2(z0);
    let beta = (cos_theta / amp).min(1.0).acos();
    let mut count = 0;
    for (root, entering) in [(phase - beta, true), (phase + beta, false)] {
        let at = root.rem_euclid(TAU);
        if at > 0.0 && at <= angle {
            out[count] = Crossing { at, entering };
            count += 1;
        }
    }
    if count == 2 && out[1].at < out[0].at {
        out.swap(0, 1);
    }
    (out, count)
}

/// Parameters of a cap-flux trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2WalkConfig {
    pub cap: CapSpec,
    /// Arc length per step.
    pub dt: f64,
    pub steps: u64,
    pub walkers: u64,
    pub seed: u64,
    /// Draw a fresh tangent heading before every step. When false each
    /// walker follows one great circle.
    pub rescatter: bool,
    pub budget: u64,
}

impl S2WalkConfig {
    /// Desk scale: 20 000 walkers, 2 000 steps of 0.01.
    pub fn desk(cap: CapSpec, seed: u64) -> Self {
        S2WalkConfig {
            cap,
            dt: 0.01,
            steps: 2_000,
            walkers: 20_000,
            seed,
            rescatter: false,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("dt", self.dt)?;
        let limit = self.cap.sphere_radius * self.cap.theta / 10.0;
        if self.dt >= limit {
            return Err(Error::Config(format!(
                "step {} must be below r·θ/10 = {limit}",
                self.dt
            )));
        }
        match self.walkers.checked_mul(self.steps) {
            Some(work) if work <= self.budget => Ok(()),
            _ => Err(Error::Config("walkers·steps exceeds the budget".into())),
        }
    }
}

/// Results of a cap-flux trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2WalkStats {
    pub cap: CapSpec,
    pub walkers: u64,
    pub steps: u64,
    pub dt: f64,
    pub entries: u64,
    pub exits: u64,
    pub total_time: f64,
    /// Arc length between an observed entry and the next exit.
    pub in_cap_path_samples: Vec<f64>,
    pub k_hat: Option<f64>,
    pub k_stderr: Option<f64>,
    /// `cap_volume / (k_hat · boundary_length)`.
    pub mean_path_hat: Option<f64>,
    path_cluster: Cluster,
}

impl S2WalkStats {
    pub fn empirical_mean_path(&self) -> Option<f64> {
        self.path_cluster.mean()
    }

    pub fn path_stderr(&self) -> Option<f64> {
        self.path_cluster.stderr()
    }
}

#[derive(Default)]
struct Tally {
    entries: u64,
    entries_sq: u128,
    exits: u64,
    samples: Vec<f64>,
    cluster: Cluster,
}

/// Runs a cap-flux trial; walker `i` uses stream `(seed, i)`.
pub fn s2_walk_trial(config: &S2WalkConfig) -> Result<S2WalkStats> {
    config.validate()?;
    let chunks = config.walkers.div_ceil(CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(config.walkers);
            let mut tally = Tally::default();
            for w in lo..hi {
                simulate_walker(config, w, &mut tally);
            }
            tally
        })
        .collect();
    let mut tally = Tally::default();
    for part in parts {
        tally.entries += part.entries;
        tally.entries_sq += part.entries_sq;
        tally.exits += part.exits;
        tally.samples.extend(part.samples);
        tally.cluster.merge(&part.cluster);
    }

    let cap = config.cap;
    let r = cap.sphere_radius;
    let total_time = config.steps as f64 * config.dt;
    let scale = 4.0 * PI * r * r / (cap_boundary_length(&cap) * total_time);
    let (k_hat, k_stderr) = if config.walkers > 0 && total_time > 0.0 {
        let w = config.walkers as f64;
        let mean = tally.entries as f64 / w;
        let se = (config.walkers > 1).then(|| {
            let var = (tally.entries_sq as f64 - w * mean * mean).max(0.0) / (w - 1.0);
            (var / w).sqrt() * scale
        });
        (Some(mean * scale), se)
    } else {
        (None, None)
    };
    let mean_path_hat = k_hat
        .filter(|_| tally.entries > 0)
        .map(|k| cap_volume(&cap) / (k * cap_boundary_length(&cap)));
    Ok(S2WalkStats {
        cap,
        walkers: config.walkers,
        steps: config.steps,
        dt: config.dt,
        entries: tally.entries,
        exits: tally.exits,
        total_time,
        in_cap_path_samples: tally.samples,
        k_hat,
        k_stderr,
        mean_path_hat,
        path_cluster: tally.cluster,
    })
}

fn simulate_walker(config: &S2WalkConfig, index: u64, tally: &mut Tally) {
    let r = config.cap.sphere_radius;
    let cos_theta = config.cap.cos_theta();
    let angle = config.dt / r;
    let mut rng = RngStream::new(config.seed, index).rng();
    let mut state = S2WalkerState::random(&mut rng);

    let mut inside = state.position[2] >= cos_theta;
    let mut entered = false;
    let mut arc = 0.0;
    let (mut entries, mut exits) = (0u64, 0u64);
    let (mut path_sum, mut path_count) = (0.0, 0u64);
    for _ in 0..config.steps {
        if config.rescatter {
            state.resample_heading(&mut rng);
        }
        let (events, count) = crossings(&state, angle, cos_theta);
        let mut from = 0.0;
        for ev in &events[..count] {
            if inside {
                arc += ev.at - from;
            }
            from = ev.at;
            if ev.entering && !inside {
                inside = true;
                entries += 1;
                entered = true;
                arc = 0.0;
            } else if !ev.entering && inside {
                inside = false;
                exits += 1;
                if entered {
                    let len = arc * r;
                    tally.samples.push(len);
                    path_sum += len;
                    path_count += 1;
                }
                entered = false;
            }
        }
        if inside {
            arc += angle - from;
        }
        state.advance(angle);
    }
    tally.entries += entries;
    tally.entries_sq += (entries as u128) * (entries as u128);
    tally.exits += exits;
    tally.cluster.push(path_sum, path_count);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn cap(r: f64, theta: f64) -> CapSpec {
        CapSpec::new(r, theta).unwrap()
    }

    #[test]
    fn cap_validation() {
        assert!(CapSpec::new(1.0, 0.0).is_err());
        assert!(CapSpec::new(1.0, 1.6).is_err());
        assert!(CapSpec::new(0.0, 1.0).is_err());
        assert!(CapSpec::new(1.0, FRAC_PI_2).is_ok());
    }

    #[test]
    fn cap_volume_examples() {
        assert!((cap_volume(&cap(1.0, FRAC_PI_2)) - TAU).abs() < 1e-15);
        assert!(cap_volume(&cap(1.0, 1e-9)) < 1e-17);
        assert!((cap_volume(&cap(1.0, FRAC_PI_3)) - PI).abs() < 1e-14);
    }

    #[test]
    fn boundary_examples() {
        assert!((cap_boundary_length(&cap(1.0, FRAC_PI_2)) - TAU).abs() < 1e-15);
        assert!((cap_boundary_length(&cap(1.0, FRAC_PI_6)) - PI).abs() < 1e-14);
        assert!((cap_boundary_length(&cap(2.0, FRAC_PI_2)) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn mean_chord_examples() {
        assert!((cap_mean_chord(&cap(1.0, FRAC_PI_2)) - PI).abs() < 1e-15);
        assert!((cap_mean_chord(&cap(1.0, FRAC_PI_3)) - PI / 3f64.sqrt()).abs() < 1e-14);
        let tiny = 1e-6;
        assert!((cap_mean_chord(&cap(1.0, tiny)) - PI * tiny / 2.0).abs() < 1e-15);
    }

    #[test]
    fn flux_identity_on_the_sphere() {
        for i in 1..=100 {
            let theta = FRAC_PI_2 * i as f64 / 100.0;
            for r in [0.5, 1.0, 3.0] {
                let c = cap(r, theta);
                let lhs = cap_mean_chord(&c) * cap_boundary_length(&c) / PI;
                assert!((lhs / cap_volume(&c) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_cap_approaches_the_flat_disk() {
        let theta = 0.05;
        let c = cap(2.0, theta);
        let flat = PI * (2.0 * theta) / 2.0;
        assert!((cap_mean_chord(&c) / flat - 1.0).abs() < 0.01);
    }

    #[test]
    fn geodesic_chord_examples() {
        let hemi = cap(1.0, FRAC_PI_2);
        assert!((geodesic_chord_length(0.3, &hemi) - PI).abs() < 1e-12);
        let c = cap(1.0, FRAC_PI_3);
        assert!((geodesic_chord_length(FRAC_PI_2, &c) - 2.0 * PI / 3.0).abs() < 1e-12);
        // sin ψ = 0.3 < cos θ = 0.5: the circle misses the cap
        assert_eq!(geodesic_chord_length(0.3f64.asin(), &c), 0.0);
    }

    #[test]
    fn hemisphere_chords_are_constant() {
        let hemi = cap(1.0, FRAC_PI_2);
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..10_000 {
            let psi = FRAC_PI_2 * (1.0 - rng.random::<f64>());
            assert!((geodesic_chord_length(psi, &hemi) - PI).abs() < 1e-9);
        }
    }

    // Great circles of a uniformly random pole (cos ψ uniform) meet the cap
    // with probability sin θ; their mean in-cap arc is the cap mean chord.
    // Midpoint-rule quadrature over cos ψ.
    #[test]
    fn great_circle_measure_reproduces_cap_mean() {
        for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, 1.2] {
            let c = cap(1.0, theta);
            let m = 400_000;
            let (mut sum, mut hit) = (0.0, 0.0);
            for i in 0..m {
                let cos_psi = (i as f64 + 0.5) / m as f64;
                let len = geodesic_chord_length(cos_psi.acos(), &c);
                if len > 0.0 {
                    sum += len;
                    hit += 1.0;
                }
            }
            assert!((hit / m as f64 - theta.sin()).abs() < 1e-5);
            assert!((sum / hit / cap_mean_chord(&c) - 1.0).abs() < 1e-4, "θ={theta}");
        }
    }

    #[test]
    fn tangency_is_preserved() {
        let mut rng = RngStream::new(3, 0).rng();
        let mut s = S2WalkerState::random(&mut rng);
        for i in 0..1_000_000 {
            if i % 7 == 0 {
                s.resample_heading(&mut rng);
            }
            s.advance(0.013);
            assert!((dot3(&s.position, &s.position) - 1.0).abs() < 1e-9);
            assert!((dot3(&s.heading, &s.heading) - 1.0).abs() < 1e-9);
            assert!(dot3(&s.position, &s.heading).abs() < 1e-9);
        }
    }

    #[test]
    fn crossings_follow_the_arc() {
        // start on the equator heading north: enters a θ = π/3 cap after π/6
        let s = S2WalkerState { position: [1.0, 0.0, 0.0], heading: [0.0, 0.0, 1.0] };
        let (ev, n) = crossings(&s, 1.0, 0.5);
        assert_eq!(n, 1);
        assert!((ev[0].at - FRAC_PI_6).abs() < 1e-12 && ev[0].entering);
        // over a long arc it leaves again after a further 2π/3
        let (ev, n) = crossings(&s, 3.0, 0.5);
        assert_eq!(n, 2);
        assert!((ev[1].at - (FRAC_PI_6 + 2.0 * FRAC_PI_3)).abs() < 1e-12 && !ev[1].entering);
    }

    #[test]
    fn empty_and_invalid_configs() {
        let mut cfg = S2WalkConfig::desk(cap(1.0, FRAC_PI_4), 1);
        cfg.walkers = 0;
        let stats = s2_walk_trial(&cfg).unwrap();
        assert_eq!(stats.entries, 0);
        assert!(stats.k_hat.is_none());
        cfg.walkers = 10;
        cfg.dt = 0.1;
        assert!(matches!(s2_walk_trial(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn diffusive_walk_has_cap_flux_constant() {
        // Heading resampled every step; only the flux estimate is checked.
        let cfg = S2WalkConfig {
            walkers: 5_000,
            rescatter: true,
            ..S2WalkConfig::desk(cap(1.0, FRAC_PI_2), 11)
        };
        let stats = s2_walk_trial(&cfg).unwrap();
        let (k, se) = (stats.k_hat.unwrap(), stats.k_stderr.unwrap());
        assert!((k - 1.0 / PI).abs() < 5.0 * se, "{k} ± {se}");
        assert!(stats.entries.abs_diff(stats.exits) <= cfg.walkers);
    }

    #[test]
    fn great_circle_walk_small_run() {
        let cfg = S2WalkConfig { walkers: 4_000, ..S2WalkConfig::desk(cap(1.0, FRAC_PI_4), 12) };
        let stats = s2_walk_trial(&cfg).unwrap();
        let k = stats.k_hat.unwrap();
        assert!((k * PI - 1.0).abs() < 0.05, "{k}");
        let path = stats.empirical_mean_path().unwrap();
        assert!((path / cap_mean_chord(&cfg.cap) - 1.0).abs() < 0.05, "{path}");
    }
}
