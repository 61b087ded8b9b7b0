//! Fixed-step random walk inside an n-ball with specular reflection.
//!
//! Each walker moves a distance `dt` per step (speed 1). When a step would
//! leave the ball, the crossing point `f` on the sphere is found and the
//! overshoot is folded back across the tangent plane at `f`; the step counts
//! as one boundary hit. The flux estimate
//!
//! ```text
//! k_hat = hits · V / (walkers · A · steps · dt)
//! ```
//!
//! is the fraction of walker-time spent crossing the wall, normalised by the
//! density `walkers / V` and the wall area `A`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{BallGeometry, Dimension, MAX_DIM};
use crate::error::{ensure_positive, Error, Result};
use crate::sampling::{fill_point_in_ball, fill_unit_direction, RngStream, SampleMode};

/// Walkers handled per parallel work item. Fixed so that floating-point
/// reductions do not depend on the number of threads.
const CHUNK: u64 = 64;

/// Radial safety factor applied when a fold lands on or outside the sphere.
const CLAMP: f64 = 1.0 - 1e-12;

/// Default cap on `walkers · steps`.
pub const DEFAULT_BUDGET: u64 = 100_000_000_000;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Position and unit heading of one walker.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    pub position: Vec<f64>,
    pub direction: Vec<f64>,
}

/// Where a ray leaves the ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Collision {
    /// Ray parameter with `|p + tau·d| = r`.
    pub tau: f64,
    /// The boundary point `p + tau·d`.
    pub point: Vec<f64>,
}

/// Exit point of the ray `p + t·d`, `t >= 0`, from the ball of radius `r`.
pub fn collision_point(p: &[f64], d: &[f64], r: f64) -> Result<Collision> {
    let tau = exit_parameter(dot(p, d), dot(p, p), r)?;
    let point = p.iter().zip(d).map(|(x, v)| x + tau * v).collect();
    Ok(Collision { tau, point })
}

#[inline]
fn exit_parameter(pd: f64, p2: f64, r: f64) -> Result<f64> {
    let disc = pd * pd + r * r - p2;
    if disc < -1e-12 * r * r {
        return Err(Error::Internal(format!(
            "negative discriminant {disc:e} (p·d = {pd}, |p|² = {p2}, r = {r})"
        )));
    }
    Ok(-pd + disc.max(0.0).sqrt())
}

/// Result of advancing one walker by one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    Interior,
    /// The step crossed the sphere after travelling `tau`.
    Reflected { tau: f64 },
}

impl StepOutcome {
    pub fn is_hit(self) -> bool {
        matches!(self, StepOutcome::Reflected { .. })
    }
}

/// Advances `state` by `dt`, reflecting specularly at the sphere of radius `r`.
pub fn reflect_step(state: &mut WalkerState, dt: f64, r: f64) -> Result<StepOutcome> {
    let r = ensure_positive("radius", r)?;
    let dt = ensure_positive("dt", dt)?;
    check_step(dt, r)?;
    if state.position.len() != state.direction.len() || state.position.len() > MAX_DIM {
        return Err(Error::Config("position and direction must share a dimension <= 16".into()));
    }
    advance(&mut state.position, &mut state.direction, dt, r)
}

fn check_step(dt: f64, r: f64) -> Result<()> {
    if dt >= r / 10.0 {
        return Err(Error::Config(format!(
            "step {dt} must be below radius/10 = {} so a step crosses the wall at most once",
            r / 10.0
        )));
    }
    Ok(())
}

#[inline]
fn advance(pos: &mut [f64], dir: &mut [f64], dt: f64, r: f64) -> Result<StepOutcome> {
    let n = pos.len();
    let mut q = [0.0f64; MAX_DIM];
    let q = &mut q[..n];
    for ((qj, pj), dj) in q.iter_mut().zip(pos.iter()).zip(dir.iter()) {
        *qj = pj + dt * dj;
    }
    let r2 = r * r;
    if dot(q, q) < r2 {
        pos.copy_from_slice(q);
        return Ok(StepOutcome::Interior);
    }

    let tau = exit_parameter(dot(pos, dir), dot(pos, pos), r)?.clamp(0.0, dt);
    let mut normal = [0.0f64; MAX_DIM];
    let normal = &mut normal[..n];
    for ((nj, pj), dj) in normal.iter_mut().zip(pos.iter()).zip(dir.iter()) {
        *nj = pj + tau * dj;
    }
    // (q - f)·n̂ and d·n̂, with n̂ = f/|f|
    let f_norm = dot(normal, normal).sqrt();
    let mut overshoot = 0.0;
    for (nj, qj) in normal.iter_mut().zip(q.iter()) {
        let fj = *nj;
        *nj = fj / f_norm;
        overshoot += (qj - fj) * *nj;
    }
    let dn = dot(dir, normal);

    let mut d2 = 0.0;
    for ((qj, dj), nj) in q.iter_mut().zip(dir.iter_mut()).zip(normal.iter()) {
        *qj -= 2.0 * overshoot * nj;
        *dj -= 2.0 * dn * nj;
        d2 += *dj * *dj;
    }
    let inv = 1.0 / d2.sqrt();
    dir.iter_mut().for_each(|d| *d *= inv);

    let q2 = dot(q, q);
    if q2 >= r2 {
        let s = r * CLAMP / q2.sqrt();
        q.iter_mut().for_each(|x| *x *= s);
    }
    pos.copy_from_slice(q);
    Ok(StepOutcome::Reflected { tau })
}

/// Parameters of one ball-walk trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub dim: Dimension,
    pub radius: f64,
    /// Step length, and step duration at unit speed.
    pub dt: f64,
    pub steps: u64,
    pub walkers: u64,
    pub seed: u64,
    pub mode: SampleMode,
    /// Resample every walker's direction before every step.
    pub rescatter: bool,
    /// Upper bound on `walkers · steps`.
    pub budget: u64,
}

impl WalkConfig {
    /// 20 000 walkers, 2 000 steps of 0.01 in the unit ball, rescattering.
    pub fn desk(dim: Dimension, seed: u64) -> Self {
        WalkConfig {
            dim,
            radius: 1.0,
            dt: 0.01,
            steps: 2_000,
            walkers: 20_000,
            seed,
            mode: SampleMode::Direct,
            rescatter: true,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<BallGeometry> {
        let geom = BallGeometry::new(self.dim, self.radius)?;
        ensure_positive("dt", self.dt)?;
        check_step(self.dt, self.radius)?;
        self.mode.check(self.dim)?;
        match self.walkers.checked_mul(self.steps) {
            Some(work) if work <= self.budget => Ok(geom),
            _ => Err(Error::Config(format!(
                "walkers·steps = {}·{} exceeds the budget of {}",
                self.walkers, self.steps, self.budget
            ))),
        }
    }
}

/// Accumulated results of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub geometry: BallGeometry,
    pub walkers: u64,
    pub steps: u64,
    pub dt: f64,
    pub boundary_hits: u64,
    /// `steps · dt`.
    pub total_time: f64,
    /// Path travelled between consecutive wall hits of one walker. The flight
    /// before a walker's first hit is not included.
    pub in_region_path_samples: Vec<f64>,
    /// `None` when no walker-time was simulated.
    pub k_hat: Option<f64>,
    pub k_stderr: Option<f64>,
    /// `V / (k_hat · A)`, defined once at least one hit was seen.
    pub mean_path_hat: Option<f64>,
    path_cluster: Cluster,
}

impl WalkStats {
    /// Plain mean of the in-region path samples.
    pub fn empirical_mean_path(&self) -> Option<f64> {
        self.path_cluster.mean()
    }

    /// Standard error of [`Self::empirical_mean_path`], treating each walker as
    /// one cluster (samples of a walker are correlated).
    pub fn path_stderr(&self) -> Option<f64> {
        self.path_cluster.stderr()
    }
}

/// Ratio-estimator sums over per-walker clusters `(sum_w, count_w)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct Cluster {
    sum: f64,
    count: u64,
    sum_sq: f64,
    sum_count: f64,
    count_sq: f64,
    clusters: u64,
}

impl Cluster {
    pub(crate) fn push(&mut self, sum: f64, count: u64) {
        let c = count as f64;
        self.sum += sum;
        self.count += count;
        self.sum_sq += sum * sum;
        self.sum_count += sum * c;
        self.count_sq += c * c;
        self.clusters += 1;
    }

    pub(crate) fn merge(&mut self, other: &Cluster) {
        self.sum += other.sum;
        self.count += other.count;
        self.sum_sq += other.sum_sq;
        self.sum_count += other.sum_count;
        self.count_sq += other.count_sq;
        self.clusters += other.clusters;
    }

    pub(crate) fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    pub(crate) fn stderr(&self) -> Option<f64> {
        let m = self.mean()?;
        if self.clusters < 2 {
            return None;
        }
        let g = self.clusters as f64;
        let resid = (self.sum_sq - 2.0 * m * self.sum_count + m * m * self.count_sq).max(0.0);
        let total = self.count as f64;
        Some((resid * g / (g - 1.0)).sqrt() / total)
    }
}

#[derive(Default)]
struct Tally {
    hits: u64,
    hits_sq: u128,
    samples: Vec<f64>,
    cluster: Cluster,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.hits += other.hits;
        self.hits_sq += other.hits_sq;
        self.samples.extend(other.samples);
        self.cluster.merge(&other.cluster);
        self
    }
}

/// Runs one trial. Walker `i` draws all its randomness from stream
/// `(config.seed, i)`, so the result is independent of the thread count.
pub fn run_trial(config: &WalkConfig) -> Result<WalkStats> {
    let geom = config.validate()?;
    let chunks = config.walkers.div_ceil(CHUNK);
    let parts: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(config.walkers);
            let mut tally = Tally::default();
            for w in lo..hi {
                simulate_walker(config, w, &mut tally)?;
            }
            Ok(tally)
        })
        .collect();
    let mut tally = Tally::default();
    for part in parts {
        tally = tally.merge(part?);
    }
    Ok(finish(config, geom, tally))
}

fn simulate_walker(config: &WalkConfig, index: u64, tally: &mut Tally) -> Result<()> {
    let n = config.dim.as_usize();
    let (r, dt) = (config.radius, config.dt);
    let mut rng = RngStream::new(config.seed, index).rng();
    let mut pos = [0.0f64; MAX_DIM];
    let mut dir = [0.0f64; MAX_DIM];
    let (pos, dir) = (&mut pos[..n], &mut dir[..n]);
    fill_point_in_ball(pos, r, config.mode, &mut rng);
    fill_unit_direction(dir, config.mode, &mut rng);

    let mut hits = 0u64;
    let mut seen_hit = false;
    let mut flight = 0.0;
    let (mut path_sum, mut path_count) = (0.0, 0u64);
    for _ in 0..config.steps {
        if config.rescatter {
            fill_unit_direction(dir, config.mode, &mut rng);
        }
        match advance(pos, dir, dt, r)? {
            StepOutcome::Interior => flight += dt,
            StepOutcome::Reflected { tau } => {
                hits += 1;
                if seen_hit {
                    let path = flight + tau;
                    tally.samples.push(path);
                    path_sum += path;
                    path_count += 1;
                }
                seen_hit = true;
                flight = dt - tau;
            }
        }
        debug_assert!(dot(pos, pos) <= r * r, "walker escaped: |p|² = {}", dot(pos, pos));
    }
    tally.hits += hits;
    tally.hits_sq += (hits as u128) * (hits as u128);
    tally.cluster.push(path_sum, path_count);
    Ok(())
}

fn finish(config: &WalkConfig, geom: BallGeometry, tally: Tally) -> WalkStats {
    let total_time = config.steps as f64 * config.dt;
    let walker_time = config.walkers as f64 * total_time;
    let (k_hat, k_stderr) = if walker_time > 0.0 {
        let scale = geom.volume / (geom.surface_area * total_time);
        let w = config.walkers as f64;
        let mean = tally.hits as f64 / w;
        let k_hat = mean * scale;
        let stderr = (config.walkers > 1).then(|| {
            let var = (tally.hits_sq as f64 - w * mean * mean).max(0.0) / (w - 1.0);
            (var / w).sqrt() * scale
        });
        (Some(k_hat), stderr)
    } else {
        (None, None)
    };
    let mean_path_hat = k_hat
        .filter(|_| tally.hits > 0)
        .map(|k| geom.volume / (k * geom.surface_area));
    WalkStats {
        geometry: geom,
        walkers: config.walkers,
        steps: config.steps,
        dt: config.dt,
        boundary_hits: tally.hits,
        total_time,
        in_region_path_samples: tally.samples,
        k_hat,
        k_stderr,
        mean_path_hat,
        path_cluster: tally.cluster,
    }
}

/// `E(l) = V / (k_hat · A)` for the walked ball.
pub fn estimate_mean_path(stats: &WalkStats, geom: &BallGeometry) -> Result<f64> {
    match stats.k_hat {
        Some(k) if stats.boundary_hits > 0 && k > 0.0 => Ok(geom.volume / (k * geom.surface_area)),
        _ => Err(Error::Undefined("no boundary hits were recorded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::theoretical_k;
    use proptest::prelude::*;
    use rand::Rng;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn norm(v: &[f64]) -> f64 {
        dot(v, v).sqrt()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn collision_examples() {
        let c = collision_point(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((c.tau - 1.0).abs() < 1e-15 && close(&c.point, &[1.0, 0.0], 1e-15));
        let c = collision_point(&[0.5, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((c.tau - 0.5).abs() < 1e-15 && close(&c.point, &[1.0, 0.0], 1e-15));
        let c = collision_point(&[0.6, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert!((c.tau - 0.8).abs() < 1e-15 && close(&c.point, &[0.6, 0.8], 1e-15));
    }

    #[test]
    fn collision_outside_is_reported() {
        // |p| > r with d pointing away: no real root.
        let err = collision_point(&[2.0, 0.0], &[0.0, 1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::Internal(_)), "{err}");
    }

    #[test]
    fn head_on_bounce() {
        let mut s = WalkerState { position: vec![0.995, 0.0, 0.0], direction: vec![1.0, 0.0, 0.0] };
        let out = reflect_step(&mut s, 0.01, 1.0).unwrap();
        assert!(out.is_hit());
        assert!(close(&s.position, &[0.995, 0.0, 0.0], 1e-12));
        assert!(close(&s.direction, &[-1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn interior_step() {
        let mut s = WalkerState { position: vec![0.0, 0.0], direction: vec![0.0, 1.0] };
        assert_eq!(reflect_step(&mut s, 0.01, 1.0).unwrap(), StepOutcome::Interior);
        assert!(close(&s.position, &[0.0, 0.01], 1e-15));

        // (0.6, 0.3985) + 0.01·(0, 1) is well inside the unit disk.
        let mut s = WalkerState { position: vec![0.6, 0.3985], direction: vec![0.0, 1.0] };
        assert_eq!(reflect_step(&mut s, 0.01, 1.0).unwrap(), StepOutcome::Interior);
    }

    #[test]
    fn oblique_bounce_matches_hand_computation() {
        // Oracle, exact arithmetic: the wall at x = 0.6 is y = 0.8, so
        // tau = 0.8 - 0.7985 = 0.0015 and n̂ = (0.6, 0.8).
        // q = (0.6, 0.8085), (q - f)·n̂ = 0.0085·0.8 = 0.0068
        // q' = q - 0.0136·n̂ = (0.59184, 0.79762)
        // d' = (0, 1) - 1.6·n̂ = (-0.96, -0.28)
        let mut s = WalkerState { position: vec![0.6, 0.7985], direction: vec![0.0, 1.0] };
        let out = reflect_step(&mut s, 0.01, 1.0).unwrap();
        match out {
            StepOutcome::Reflected { tau } => assert!((tau - 0.0015).abs() < 1e-12),
            other => panic!("expected a hit, got {other:?}"),
        }
        assert!(close(&s.position, &[0.59184, 0.79762], 1e-12), "{:?}", s.position);
        assert!(close(&s.direction, &[-0.96, -0.28], 1e-12), "{:?}", s.direction);
    }

    #[test]
    fn step_too_large_is_rejected() {
        let mut s = WalkerState { position: vec![0.0], direction: vec![1.0] };
        assert!(matches!(reflect_step(&mut s, 0.1, 1.0), Err(Error::Config(_))));
        let mut cfg = WalkConfig::desk(dim(3), 1);
        cfg.dt = 0.2;
        assert!(run_trial(&cfg).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let mut cfg = WalkConfig::desk(dim(2), 1);
        cfg.budget = 1000;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn empty_run_has_no_estimate() {
        let mut cfg = WalkConfig::desk(dim(3), 1);
        cfg.steps = 0;
        cfg.walkers = 100;
        let stats = run_trial(&cfg).unwrap();
        assert_eq!(stats.boundary_hits, 0);
        assert!(stats.k_hat.is_none());
        assert!(matches!(estimate_mean_path(&stats, &stats.geometry), Err(Error::Undefined(_))));
    }

    #[test]
    fn plug_in_mean_path() {
        let mut cfg = WalkConfig::desk(dim(3), 1);
        cfg.walkers = 10;
        cfg.steps = 10;
        let mut stats = run_trial(&cfg).unwrap();
        stats.boundary_hits = 1;
        stats.k_hat = Some(0.25);
        let g3 = BallGeometry::unit(dim(3));
        assert!((estimate_mean_path(&stats, &g3).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        stats.k_hat = Some(1.0 / std::f64::consts::PI);
        let g2 = BallGeometry::unit(dim(2));
        assert!((estimate_mean_path(&stats, &g2).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn containment_fuzz() {
        // 10^5 steps per walker with debug assertions active.
        let cfg = WalkConfig {
            dim: dim(4),
            radius: 1.0,
            dt: 0.05,
            steps: 100_000,
            walkers: 8,
            seed: 3,
            mode: SampleMode::Direct,
            rescatter: true,
            budget: DEFAULT_BUDGET,
        };
        run_trial(&cfg).unwrap();
        let billiard = WalkConfig { rescatter: false, ..cfg };
        run_trial(&billiard).unwrap();
    }

    #[test]
    fn direction_stays_unit_without_rescatter() {
        let mut rng = RngStream::new(12, 0).rng();
        let mut s = WalkerState { position: vec![0.3, -0.2, 0.1], direction: vec![0.0; 3] };
        fill_unit_direction(&mut s.direction, SampleMode::Direct, &mut rng);
        let mut hits = 0;
        for _ in 0..1_000_000 {
            if reflect_step(&mut s, 0.09, 1.0).unwrap().is_hit() {
                hits += 1;
            }
        }
        assert!(hits > 10_000);
        assert!((norm(&s.direction) - 1.0).abs() < 1e-9);
        assert!(norm(&s.position) <= 1.0);
    }

    #[test]
    fn statistical_k_within_five_stderr() {
        // a reduced desk run; the full-scale one is in the acceptance suite
        for n in 1..=5 {
            let cfg = WalkConfig { walkers: 4_000, steps: 1_000, ..WalkConfig::desk(dim(n), 40 + n as u64) };
            let stats = run_trial(&cfg).unwrap();
            let (k, se) = (stats.k_hat.unwrap(), stats.k_stderr.unwrap());
            let theory = theoretical_k(dim(n));
            assert!((k - theory).abs() < 5.0 * se, "n={n}: {k} ± {se} vs {theory}");
        }
    }

    #[test]
    fn billiard_residence_matches_flux() {
        let cfg = WalkConfig { walkers: 4_000, rescatter: false, ..WalkConfig::desk(dim(3), 9) };
        let stats = run_trial(&cfg).unwrap();
        let flux = stats.mean_path_hat.unwrap();
        let direct = stats.empirical_mean_path().unwrap();
        assert!((direct / flux - 1.0).abs() < 0.03, "{direct} vs {flux}");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = WalkConfig { walkers: 1_000, steps: 300, ..WalkConfig::desk(dim(3), 5) };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_trial(&cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.boundary_hits, b.boundary_hits);
        assert_eq!(a.k_hat.unwrap().to_bits(), b.k_hat.unwrap().to_bits());
        assert_eq!(a.in_region_path_samples, b.in_region_path_samples);
        assert_eq!(a.path_stderr().map(f64::to_bits), b.path_stderr().map(f64::to_bits));
    }

    proptest! {
        #[test]
        fn reflection_is_an_involution(
            raw in prop::collection::vec(-1.0f64..1.0, 2..=6),
            nraw in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let n = raw.len();
            let d: Vec<f64> = { let s = norm(&raw); prop_assume!(s > 1e-3); raw.iter().map(|x| x / s).collect() };
            let nh: Vec<f64> = { let s = norm(&nraw[..n]); prop_assume!(s > 1e-3); nraw[..n].iter().map(|x| x / s).collect() };
            let reflect = |v: &[f64]| { let k = dot(v, &nh); v.iter().zip(&nh).map(|(a, b)| a - 2.0 * k * b).collect::<Vec<_>>() };
            let twice = reflect(&reflect(&d));
            prop_assert!(close(&twice, &d, 1e-12));
        }

        #[test]
        fn fold_preserves_path_length(seed in any::<u64>(), n in 2usize..=8) {
            let mut rng = RngStream::new(seed, 0).rng();
            let dt = 0.05;
            let mut p = vec![0.0; n];
            let mut d = vec![0.0; n];
            fill_unit_direction(&mut p, SampleMode::Direct, &mut rng);
            // start within dt of the wall, heading outward-ish
            let depth = rng.random::<f64>() * dt;
            p.iter_mut().for_each(|x| *x *= 1.0 - depth);
            fill_unit_direction(&mut d, SampleMode::Direct, &mut rng);
            if dot(&p, &d) < 0.0 { d.iter_mut().for_each(|x| *x = -*x); }
            let start = p.clone();
            let mut state = WalkerState { position: p, direction: d.clone() };
            let out = reflect_step(&mut state, dt, 1.0).unwrap();
            if let StepOutcome::Reflected { tau } = out {
                let c = collision_point(&start, &d, 1.0).unwrap();
                prop_assert!((norm(&c.point) - 1.0).abs() < 1e-9);
                prop_assert!((c.tau - tau).abs() < 1e-12);
                let after: Vec<f64> = state.position.iter().zip(&c.point).map(|(a, b)| a - b).collect();
                let before: Vec<f64> = c.point.iter().zip(&start).map(|(a, b)| a - b).collect();
                // exact unless the clamp kicked in on a grazing fold
                if norm(&state.position) < CLAMP {
                    prop_assert!((norm(&after) + norm(&before) - dt).abs() < 1e-9);
                }
                prop_assert!(norm(&state.position) <= 1.0);
            }
        }
    }
}
