//! Boundary-flux constants of random walks.
//!
//! A walker moving at unit speed through a region of volume `V` and boundary
//! area `A` crosses the boundary at a rate `K · ρ · A`, where `ρ` is the
//! walker density and `K` depends only on the dimension:
//! `K_n = V_{n-1} / A_n`, i.e. 1/2, 1/π, 1/4, 2/(3π), ... The mean path
//! between entry and exit is then `E(l) = V / (K · A)`, which for a ball is
//! the mean parallel-class chord `V_n / V_{n-1}`.
//!
//! Modules:
//! - [`analytic`]: closed forms for balls and the exact `K_n`.
//! - [`sampling`]: reproducible streams, uniform directions and ball points.
//! - [`walker`]: the reflecting walk in the n-ball and the `K` estimator.
//! - [`chords`]: Bertrand chord measures and the walk/chord comparison.
//! - [`manifold_s2`]: spherical caps and the geodesic walk on the 2-sphere.
//! - [`experiment`] and [`report`]: batch runs and CSV/JSON/table output.

pub mod analytic;
pub mod chords;
pub mod error;
pub mod experiment;
pub mod manifold_s2;
pub mod report;
pub mod sampling;
pub mod walker;

pub use analytic::{exact_k, mean_chord, theoretical_k, unit_ball_volume, unit_sphere_area, BallGeometry, Dimension, ExactK};
pub use chords::{mc_mean_chord, sample_chord, walk_chord_equivalence, ChordMethod, ChordStats, EquivalenceReport};
pub use error::{Error, Result};
pub use experiment::{estimate_speed, run_experiment, ExperimentConfig, Mode, OutputFormat, SpeedEstimateInput, TrialRecord};
pub use manifold_s2::{cap_boundary_length, cap_mean_chord, cap_volume, geodesic_chord_length, s2_walk_trial, CapSpec, S2WalkConfig, S2WalkStats};
pub use report::{emit, render};
pub use sampling::{RngStream, SampleMode};
pub use walker::{collision_point, estimate_mean_path, reflect_step, run_trial, WalkConfig, WalkStats, WalkerState};
