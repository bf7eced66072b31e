//! Fixed-step integration of the Lorenz flow and of its variational
//! equation.
//!
//! Both steppers advance by exactly `cfg.step()` time units. With
//! [`Method::Dopri45`] the step is covered by adaptive Dormand–Prince
//! sub-steps under the configured tolerances, so callers always see a
//! uniform output grid.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{vector_field, StateVec, SystemParams};

/// States with a larger Euclidean norm are treated as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;

const MAX_SUBSTEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Dopri45,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "dopri45" | "dopri" | "rk45" => Ok(Method::Dopri45),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct IntegratorConfig {
    step: f64,
    method: Method,
    abs_tol: f64,
    rel_tol: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    step: f64,
    method: Method,
    abs_tol: f64,
    rel_tol: f64,
}

impl TryFrom<RawConfig> for IntegratorConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        IntegratorConfig::new(raw.step, raw.method, raw.abs_tol, raw.rel_tol)
    }
}

impl Default for IntegratorConfig {
    /// RK4 with step `1e-3`.
    fn default() -> Self {
        Self {
            step: 1e-3,
            method: Method::Rk4,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, method: Method, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {step}")));
        }
        if !(abs_tol.is_finite() && abs_tol > 0.0 && rel_tol.is_finite() && rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive, got abs {abs_tol}, rel {rel_tol}"
            )));
        }
        Ok(Self {
            step,
            method,
            abs_tol,
            rel_tol,
        })
    }

    pub fn rk4(step: f64) -> Result<Self> {
        Self::new(step, Method::Rk4, 1e-10, 1e-10)
    }

    pub fn dopri45(step: f64, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        Self::new(step, Method::Dopri45, abs_tol, rel_tol)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Number of steps that cover `duration` (rounded to the nearest step).
    pub fn steps_for(&self, duration: f64) -> usize {
        (duration / self.step).round().max(0.0) as usize
    }
}

/// Three tangent vectors stored as the columns of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame(pub Matrix3<f64>);

impl TangentFrame {
    pub fn identity() -> Self {
        TangentFrame(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl Default for TangentFrame {
    fn default() -> Self {
        Self::identity()
    }
}

pub(crate) fn rk4<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline(always)]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

// Dormand–Prince 5(4) tableau (autonomous, so the nodes c_i are not needed).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri_trial<const N: usize>(
    f: &impl Fn(&[f64; N]) -> [f64; N],
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let k1 = f(y);
    let mut t = *y;
    for i in 0..N {
        t[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(&t);
    for i in 0..N {
        t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(&t);
    for i in 0..N {
        t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(&t);
    for i in 0..N {
        t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(&t);
    for i in 0..N {
        t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(&t);
    let mut y5 = *y;
    for i in 0..N {
        y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = f(&y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Covers `h` with adaptive Dormand–Prince sub-steps.
pub(crate) fn dopri45<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    y: &[f64; N],
    h: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Option<[f64; N]> {
    let mut y = *y;
    let mut remaining = h;
    let mut dt = h;
    for _ in 0..MAX_SUBSTEPS {
        if remaining <= 0.0 {
            return Some(y);
        }
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let (y_new, err) = dopri_trial(&f, &y, dt);
        let mut acc = 0.0;
        for i in 0..N {
            let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            acc += (err[i] / scale).powi(2);
        }
        let norm = (acc / N as f64).sqrt();
        if !norm.is_finite() {
            return None;
        }
        if norm <= 1.0 {
            y = y_new;
            remaining = if last { 0.0 } else { remaining - dt };
        }
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        dt *= factor;
    }
    None
}

#[inline]
fn state_rhs(p: &SystemParams) -> impl Fn(&[f64; 3]) -> [f64; 3] + '_ {
    move |y| vector_field(p, &StateVec::from_array(*y)).to_array()
}

/// State in `y[0..3]`, frame column-major in `y[3..12]`.
#[inline]
fn augmented_rhs(p: &SystemParams) -> impl Fn(&[f64; 12]) -> [f64; 12] + '_ {
    move |y| {
        let s = StateVec::new(y[0], y[1], y[2]);
        let f = vector_field(p, &s);
        let (sigma, r, b) = (p.sigma(), p.r(), p.b());
        let mut out = [0.0; 12];
        out[0] = f.x;
        out[1] = f.y;
        out[2] = f.z;
        for c in 0..3 {
            let u = y[3 + 3 * c];
            let v = y[4 + 3 * c];
            let w = y[5 + 3 * c];
            out[3 + 3 * c] = sigma * (v - u);
            out[4 + 3 * c] = (r - s.z) * u - v - s.x * w;
            out[5 + 3 * c] = s.y * u + s.x * v - b * w;
        }
        out
    }
}

fn guard(s: &StateVec, time: f64) -> Result<()> {
    if s.is_finite() && s.norm() <= DIVERGENCE_BOUND {
        Ok(())
    } else {
        Err(Error::NonFiniteState {
            time,
            x: s.x,
            y: s.y,
            z: s.z,
        })
    }
}

impl Error {
    /// Rebases the time stamp of a [`Error::NonFiniteState`].
    pub(crate) fn at_time(self, t: f64) -> Error {
        match self {
            Error::NonFiniteState { x, y, z, .. } => Error::NonFiniteState { time: t, x, y, z },
            other => other,
        }
    }
}

/// Advances `s` by one step of the configured scheme.
pub fn step_state(p: &SystemParams, s: &StateVec, cfg: &IntegratorConfig) -> Result<StateVec> {
    let y = s.to_array();
    let out = match cfg.method {
        Method::Rk4 => Some(rk4(state_rhs(p), &y, cfg.step)),
        Method::Dopri45 => dopri45(state_rhs(p), &y, cfg.step, cfg.abs_tol, cfg.rel_tol),
    };
    let next = out.map(StateVec::from_array).unwrap_or(StateVec::new(f64::NAN, f64::NAN, f64::NAN));
    guard(&next, cfg.step)?;
    Ok(next)
}

/// Advances state and tangent frame together with the same scheme and step.
pub fn step_augmented(
    p: &SystemParams,
    s: &StateVec,
    frame: &TangentFrame,
    cfg: &IntegratorConfig,
) -> Result<(StateVec, TangentFrame)> {
    let mut y = [0.0; 12];
    y[..3].copy_from_slice(&s.to_array());
    y[3..].copy_from_slice(frame.0.as_slice());
    let out = match cfg.method {
        Method::Rk4 => Some(rk4(augmented_rhs(p), &y, cfg.step)),
        Method::Dopri45 => dopri45(augmented_rhs(p), &y, cfg.step, cfg.abs_tol, cfg.rel_tol),
    };
    let out = out.unwrap_or([f64::NAN; 12]);
    let next = StateVec::new(out[0], out[1], out[2]);
    guard(&next, cfg.step)?;
    let m = Matrix3::from_column_slice(&out[3..]);
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState {
            time: cfg.step,
            x: next.x,
            y: next.y,
            z: next.z,
        });
    }
    Ok((next, TangentFrame(m)))
}

/// Integrates the state over `duration` and returns the endpoint.
pub fn integrate(p: &SystemParams, s: &StateVec, duration: f64, cfg: &IntegratorConfig) -> Result<StateVec> {
    let mut s = *s;
    for k in 0..cfg.steps_for(duration) {
        s = step_state(p, &s, cfg).map_err(|e| e.at_time((k + 1) as f64 * cfg.step))?;
    }
    Ok(s)
}

/// Samples `(t, state)` every `every` steps, including both endpoints.
pub fn trajectory(
    p: &SystemParams,
    s: &StateVec,
    duration: f64,
    cfg: &IntegratorConfig,
    every: usize,
) -> Result<Vec<(f64, StateVec)>> {
    let every = every.max(1);
    let n = cfg.steps_for(duration);
    let mut out = Vec::with_capacity(n / every + 2);
    let mut s = *s;
    out.push((0.0, s));
    for k in 1..=n {
        let t = k as f64 * cfg.step;
        s = step_state(p, &s, cfg).map_err(|e| e.at_time(t))?;
        if k % every == 0 || k == n {
            out.push((t, s));
        }
    }
    Ok(out)
}
