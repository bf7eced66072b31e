//! The Lorenz vector field, its Jacobian, equilibria and absorbing ball.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive Lorenz parameters (sigma, r, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SystemParams {
    sigma: f64,
    r: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawParams {
    sigma: f64,
    r: f64,
    b: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SystemParams::new(raw.sigma, raw.r, raw.b)
    }
}

impl SystemParams {
    pub fn new(sigma: f64, r: f64, b: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("r", r), ("b", b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self { sigma, r, b })
    }

    /// sigma = 10, r = 28, b = 8/3.
    pub fn classical() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
        }
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Returns a copy with `r` replaced.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.sigma, r, self.b)
    }

    /// Divergence of the vector field, `-(sigma + 1 + b)`. Constant in space.
    #[inline]
    pub fn divergence(&self) -> f64 {
        -(self.sigma + 1.0 + self.b)
    }

    /// `sqrt((sigma - 1)^2 + 4 sigma r)`, the discriminant root shared by the
    /// origin eigenvalues and the dimension formula.
    #[inline]
    pub fn origin_discriminant_root(&self) -> f64 {
        let s = self.sigma;
        ((s - 1.0).powi(2) + 4.0 * s * self.r).sqrt()
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sigma={}, r={}, b={}", self.sigma, self.r, self.b)
    }
}

/// Parses a real number, accepting plain decimals and rationals like `8/3`.
pub fn parse_real(text: &str) -> Result<f64> {
    let text = text.trim();
    let bad = || Error::InvalidParams(format!("cannot parse number `{text}`"));
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => text.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

impl FromStr for SystemParams {
    type Err = Error;

    /// Parses `sigma,r,b`, e.g. `10,28,8/3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParams(format!(
                "expected sigma,r,b but got `{s}`"
            )));
        }
        SystemParams::new(
            parse_real(parts[0])?,
            parse_real(parts[1])?,
            parse_real(parts[2])?,
        )
    }
}

/// A point of the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl StateVec {
    pub const ORIGIN: StateVec = StateVec {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn distance(&self, other: &StateVec) -> f64 {
        (*self - *other).norm()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

impl From<Vector3<f64>> for StateVec {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl FromStr for StateVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParams(format!("expected x,y,z but got `{s}`")));
        }
        Ok(StateVec::new(
            parse_real(parts[0])?,
            parse_real(parts[1])?,
            parse_real(parts[2])?,
        ))
    }
}

impl fmt::Display for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for StateVec {
    type Output = StateVec;
    fn add(self, o: StateVec) -> StateVec {
        StateVec::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for StateVec {
    type Output = StateVec;
    fn sub(self, o: StateVec) -> StateVec {
        StateVec::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for StateVec {
    type Output = StateVec;
    fn mul(self, k: f64) -> StateVec {
        StateVec::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for StateVec {
    type Output = StateVec;
    fn neg(self) -> StateVec {
        StateVec::new(-self.x, -self.y, -self.z)
    }
}

/// `(sigma (y - x), r x - y - x z, -b z + x y)`.
#[inline]
pub fn vector_field(p: &SystemParams, s: &StateVec) -> StateVec {
    StateVec::new(
        p.sigma * (s.y - s.x),
        p.r * s.x - s.y - s.x * s.z,
        -p.b * s.z + s.x * s.y,
    )
}

/// Jacobian of [`vector_field`] at `s`.
#[inline]
pub fn jacobian(p: &SystemParams, s: &StateVec) -> Matrix3<f64> {
    Matrix3::new(
        -p.sigma, p.sigma, 0.0, //
        p.r - s.z, -1.0, -s.x, //
        s.y, s.x, -p.b,
    )
}

/// Which equilibrium of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    S0,
    S1,
    S2,
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumLabel::S0 => "S0",
            EquilibriumLabel::S1 => "S1",
            EquilibriumLabel::S2 => "S2",
        })
    }
}

/// The origin plus, for `r > 1`, the symmetric pair.
///
/// S1 lies in the negative octant `(-c, -c, r - 1)` and S2 in the positive
/// one `(c, c, r - 1)` with `c = sqrt(b (r - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub s0: StateVec,
    pub s12: Option<(StateVec, StateVec)>,
}

impl EquilibriumSet {
    pub fn iter(&self) -> impl Iterator<Item = (EquilibriumLabel, StateVec)> + '_ {
        std::iter::once((EquilibriumLabel::S0, self.s0)).chain(
            self.s12
                .into_iter()
                .flat_map(|(s1, s2)| [(EquilibriumLabel::S1, s1), (EquilibriumLabel::S2, s2)]),
        )
    }

    pub fn get(&self, label: EquilibriumLabel) -> Option<StateVec> {
        self.iter().find(|(l, _)| *l == label).map(|(_, s)| s)
    }

    /// Closest equilibrium to `s` and its distance.
    pub fn nearest(&self, s: &StateVec) -> (EquilibriumLabel, f64) {
        self.iter()
            .map(|(l, e)| (l, e.distance(s)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("origin is always present")
    }
}

/// Closed-form equilibria.
pub fn equilibria(p: &SystemParams) -> EquilibriumSet {
    let s12 = (p.r > 1.0).then(|| {
        let c = (p.b * (p.r - 1.0)).sqrt();
        let z = p.r - 1.0;
        (StateVec::new(-c, -c, z), StateVec::new(c, c, z))
    });
    EquilibriumSet {
        s0: StateVec::ORIGIN,
        s12,
    }
}

/// Ball around `(0, 0, r + sigma)` outside of which the quadratic
/// function `V = (x^2 + y^2 + (z - r - sigma)^2) / 2` strictly decreases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBall {
    pub center: StateVec,
    pub radius: f64,
}

impl AbsorbingBall {
    pub fn contains(&self, s: &StateVec) -> bool {
        s.distance(&self.center) <= self.radius
    }
}

const BALL_MARGIN: f64 = 1.1;

/// Absorbing ball derived from `V`.
///
/// Along the flow `dV/dt = -sigma x^2 - y^2 - b (z - c/2)^2 + b c^2 / 4` with
/// `c = r + sigma`, so `dV/dt < 0` outside an ellipsoid centred at
/// `(0, 0, c/2)`. That ellipsoid sits inside the ball of radius
/// `(c/2) sqrt(b / min(sigma, 1, b))` about the same centre, hence inside the
/// ball of radius `(c/2)(1 + sqrt(b / min(sigma, 1, b)))` about `(0, 0, c)`.
/// The returned radius carries a further 10% margin.
pub fn absorbing_ball(p: &SystemParams) -> AbsorbingBall {
    let c = p.r + p.sigma;
    let m = p.sigma.min(1.0).min(p.b);
    let radius = 0.5 * c * (1.0 + (p.b / m).sqrt()) * BALL_MARGIN;
    AbsorbingBall {
        center: StateVec::new(0.0, 0.0, c),
        radius,
    }
}

/// `V(s) = (x^2 + y^2 + (z - r - sigma)^2) / 2`.
pub fn dissipation_function(p: &SystemParams, s: &StateVec) -> f64 {
    let dz = s.z - p.r - p.sigma;
    0.5 * (s.x * s.x + s.y * s.y + dz * dz)
}

/// Derivative of [`dissipation_function`] along the vector field, computed
/// from the gradient (not from the completed-square form).
pub fn dissipation_derivative(p: &SystemParams, s: &StateVec) -> f64 {
    let f = vector_field(p, s);
    s.x * f.x + s.y * f.y + (s.z - p.r - p.sigma) * f.z
}
