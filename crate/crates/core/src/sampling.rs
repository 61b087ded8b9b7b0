//! Seeded random streams, uniform unit directions and uniform points in a ball.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` and positioned on the
//! ChaCha stream `stream_id`, so a `(seed, stream_id)` pair always yields the
//! same sequence on every platform and distinct stream ids never overlap.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytic::Dimension;
use crate::error::{ensure_positive, Error, Result};

/// Highest dimension for which rejection sampling from the cube is allowed.
/// At n = 13 the acceptance ratio `V_n / 2^n` drops below 0.1%.
pub const MAX_REJECTION_DIM: u32 = 12;

/// Identity of a reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// How unit directions and ball points are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// Draw from the cube `[-1, 1]^n` and reject points outside the ball.
    Rejection,
    /// Normalised Gaussian vectors; radius by inverse CDF.
    #[default]
    Direct,
}

impl SampleMode {
    pub fn check(self, dim: Dimension) -> Result<()> {
        if self == SampleMode::Rejection && dim.get() > MAX_REJECTION_DIM {
            return Err(Error::Config(format!(
                "rejection sampling is refused for dimension {} (> {MAX_REJECTION_DIM})",
                dim
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Rejection => "rejection",
            SampleMode::Direct => "direct",
        })
    }
}

impl FromStr for SampleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rejection" => Ok(SampleMode::Rejection),
            "direct" => Ok(SampleMode::Direct),
            other => Err(Error::Config(format!("unknown sample mode `{other}`"))),
        }
    }
}

/// Uniform random unit vector in `dim` dimensions.
pub fn sample_unit_direction<R: Rng + ?Sized>(
    dim: Dimension,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    mode.check(dim)?;
    let mut out = vec![0.0; dim.as_usize()];
    fill_unit_direction(&mut out, mode, rng);
    Ok(out)
}

/// Uniform random point in the closed ball of radius `r`.
pub fn sample_point_in_ball<R: Rng + ?Sized>(
    dim: Dimension,
    r: f64,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let r = ensure_positive("radius", r)?;
    mode.check(dim)?;
    let mut out = vec![0.0; dim.as_usize()];
    fill_point_in_ball(&mut out, r, mode, rng);
    Ok(out)
}

/// Writes a uniform unit vector of length `out.len()` into `out`.
///
/// Unchecked counterpart of [`sample_unit_direction`] for hot loops; the
/// caller has validated the mode against the dimension.
#[inline]
pub fn fill_unit_direction<R: Rng + ?Sized>(out: &mut [f64], mode: SampleMode, rng: &mut R) {
    loop {
        let mut norm2 = 0.0;
        match mode {
            SampleMode::Direct => {
                for x in out.iter_mut() {
                    *x = rng.sample(StandardNormal);
                    norm2 += *x * *x;
                }
            }
            SampleMode::Rejection => {
                for x in out.iter_mut() {
                    *x = 2.0 * rng.random::<f64>() - 1.0;
                    norm2 += *x * *x;
                }
                if norm2 > 1.0 {
                    continue;
                }
            }
        }
        if norm2 == 0.0 {
            continue;
        }
        // divide rather than multiply by the reciprocal: in one dimension
        // this gives exactly ±1
        let norm = norm2.sqrt();
        for x in out.iter_mut() {
            *x /= norm;
        }
        return;
    }
}

/// Writes a uniform point of the radius-`r` ball into `out`.
#[inline]
pub fn fill_point_in_ball<R: Rng + ?Sized>(out: &mut [f64], r: f64, mode: SampleMode, rng: &mut R) {
    match mode {
        SampleMode::Direct => {
            fill_unit_direction(out, mode, rng);
            // 1 - [0, 1) is uniform on (0, 1].
            let u: f64 = 1.0 - rng.random::<f64>();
            let s = r * u.powf(1.0 / out.len() as f64);
            for x in out.iter_mut() {
                *x *= s;
            }
        }
        SampleMode::Rejection => loop {
            let mut norm2 = 0.0;
            for x in out.iter_mut() {
                *x = r * (2.0 * rng.random::<f64>() - 1.0);
                norm2 += *x * *x;
            }
            if norm2 < r * r {
                return;
            }
        },
    }
}
