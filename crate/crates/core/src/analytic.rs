//! Closed-form geometry of n-balls: volumes, surface areas, the flux
//! constant `K_n = V_{n-1} / A_n` and the mean chord `V_n / V_{n-1}`.

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Spatial dimension of a ball, `1 ..= 16`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=MAX_DIM as u32).contains(&n) {
            Ok(Dimension(n))
        } else {
            Err(Error::DimensionOutOfRange(n))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// All supported dimensions in increasing order.
    pub fn all() -> impl Iterator<Item = Dimension> {
        (1..=MAX_DIM as u32).map(Dimension)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Volume of the unit n-ball, `π^{n/2} / Γ(n/2 + 1)`, for `0 <= n <= 16`.
///
/// Uses `V_n = (2π/n) V_{n-2}` from `V_0 = 1`, `V_1 = 2`. The zero-dimensional
/// ball is a point with unit counting measure, which is what makes `K_1 = 1/2`.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n as usize > MAX_DIM {
        return Err(Error::DimensionOutOfRange(n));
    }
    let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = 2 - n % 2;
    while k <= n {
        if k >= 2 {
            v *= 2.0 * PI / k as f64;
        }
        k += 2;
    }
    Ok(v)
}

/// Surface area of the unit sphere bounding the n-ball, `A_n = n V_n`.
pub fn unit_sphere_area(n: Dimension) -> f64 {
    n.get() as f64 * ball_volume(n.get())
}

/// The flux constant `K_n = V_{n-1} / A_n`.
pub fn theoretical_k(n: Dimension) -> f64 {
    ball_volume(n.get() - 1) / unit_sphere_area(n)
}

/// Mean chord of the radius-`r` n-ball under the parallel-class measure,
/// `V_n(r) / V_{n-1}(r)`.
pub fn mean_chord(n: Dimension, r: f64) -> Result<f64> {
    let r = ensure_positive("radius", r)?;
    Ok(ball_volume(n.get()) / ball_volume(n.get() - 1) * r)
}

// Dimension has already been range-checked by the caller.
fn ball_volume(n: u32) -> f64 {
    unit_ball_volume(n).expect("dimension validated")
}

/// `K_n` in exact form, `(numerator / denominator) · π^pi_power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactK {
    pub numerator: u64,
    pub denominator: u64,
    /// `0` for odd n, `-1` for even n.
    pub pi_power: i32,
}

impl ExactK {
    pub fn value(&self) -> f64 {
        let q = self.numerator as f64 / self.denominator as f64;
        q * PI.powi(self.pi_power)
    }
}

impl fmt::Display for ExactK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.pi_power, self.numerator) {
            (0, _) => write!(f, "{}/{}", self.numerator, self.denominator),
            (-1, 1) if self.denominator == 1 => write!(f, "1/π"),
            (-1, _) => write!(f, "{}/({}π)", self.numerator, self.denominator),
            (p, _) => write!(f, "{}/{}·π^{}", self.numerator, self.denominator, p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        Ratio { num: num / g, den: den / g }
    }

    fn mul(self, num: u64, den: u64) -> Self {
        // Cross-reduce first so intermediate products stay small.
        let g1 = self.num.gcd(&den);
        let g2 = num.gcd(&self.den);
        Ratio::new((self.num / g1) * (num / g2), (self.den / g2) * (den / g1))
    }
}

/// Rational coefficient `q_n` with `V_n = q_n · π^{floor(n/2)}`.
fn volume_coefficient(n: u32) -> Ratio {
    let mut q = if n.is_multiple_of(2) { Ratio::new(1, 1) } else { Ratio::new(2, 1) };
    let mut k = 2 + n % 2;
    while k <= n {
        q = q.mul(2, k as u64);
        k += 2;
    }
    q
}

/// Exact `K_n = q_{n-1} / (n q_n) · π^{floor((n-1)/2) - floor(n/2)}`.
pub fn exact_k(n: Dimension) -> ExactK {
    let n = n.get();
    let lower = volume_coefficient(n - 1);
    let upper = volume_coefficient(n);
    let k = lower.mul(upper.den, upper.num).mul(1, n as u64);
    let pi_power = ((n - 1) / 2) as i32 - (n / 2) as i32;
    ExactK { numerator: k.num, denominator: k.den, pi_power }
}

/// Derived constants of a ball of a given dimension and radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallGeometry {
    pub dim: Dimension,
    pub radius: f64,
    pub volume: f64,
    pub surface_area: f64,
    /// Volume of the central cross-section, the (n-1)-ball of the same radius.
    pub normal_section_volume: f64,
    pub k_constant: f64,
    /// `1 / K`.
    pub alpha: f64,
    pub mean_chord: f64,
}

impl BallGeometry {
    pub fn new(dim: Dimension, radius: f64) -> Result<Self> {
        let radius = ensure_positive("radius", radius)?;
        let n = dim.get();
        let volume = ball_volume(n) * radius.powi(n as i32);
        let surface_area = n as f64 * volume / radius;
        let normal_section_volume = ball_volume(n - 1) * radius.powi(n as i32 - 1);
        let k_constant = normal_section_volume / surface_area;
        Ok(BallGeometry {
            dim,
            radius,
            volume,
            surface_area,
            normal_section_volume,
            k_constant,
            alpha: 1.0 / k_constant,
            mean_chord: volume / normal_section_volume,
        })
    }

    pub fn unit(dim: Dimension) -> Self {
        BallGeometry::new(dim, 1.0).expect("unit radius")
    }
}
