//! Search for the parameters `gamma1..gamma4` of the auxiliary function
//!
//! `V = g4 x^2 + (g3 - sigma g1) y^2 + g3 z^2 + g1 x^4 / (4 sigma)
//!      - g1 x^2 z - g1 g2 x y - (sigma / b) z`
//!
//! such that `R = -sigma z + rho^2 z^2 / 4 + rho^2 (y + (b-1) x / sigma)^2 / 4 + dV/dt`
//! is non-positive everywhere. Each gamma is placed at the midpoint of its
//! admissible interval (the vertex, for `gamma4`) to keep the margins away
//! from rounding.

// `!(a < b)` is deliberate throughout: it also rejects NaN brackets.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use super::conditions::{at_most, check_conditions, gamma_quadratic_roots, k1, strictly_less, Outcome};
use super::symmetrized::{rho, symmetrized_eigenvalues};
use super::s0;
use crate::error::{Error, Result};
use crate::model::{absorbing_ball, vector_field, StateVec, SystemParams};
use crate::sampling::QuasiRandom;

pub const DEFAULT_R_SAMPLES: usize = 100_000;
/// Allowed positive excess of sampled `R` (rounding in the quartic terms).
pub const R_SLACK: f64 = 1e-9;
const SAMPLE_SEED: u64 = 0x5eed;
const BOX_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateBranch {
    /// `gamma2 = 0`; available when the leading coefficient is negative.
    ZeroGamma2,
    /// `gamma2` strictly between the roots of the gamma quadratic.
    PositiveGamma2,
    /// Vanishing leading coefficient; any positive `gamma2` works.
    DegenerateQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaCertificate {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub rho: f64,
    pub s0: f64,
    pub branch: CertificateBranch,
}

/// The four inequalities on the gammas that imply `R <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateChecks {
    pub gamma1_nonnegative: bool,
    pub gamma3_strict_lower: bool,
    pub gamma3_lower: bool,
    pub gamma3_upper: bool,
}

impl CertificateChecks {
    pub fn all(&self) -> bool {
        self.gamma1_nonnegative && self.gamma3_strict_lower && self.gamma3_lower && self.gamma3_upper
    }
}

/// `R = a1 x^4 + a2 x^2 z + a3 z^2 + b1 x^2 + b2 x y + b3 y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl RCoefficients {
    pub fn eval(&self, s: &StateVec) -> f64 {
        let (x, y, z) = (s.x, s.y, s.z);
        let x2 = x * x;
        self.a1 * x2 * x2 + self.a2 * x2 * z + self.a3 * z * z + self.b1 * x2 + self.b2 * x * y + self.b3 * y * y
    }

    pub fn a1_nonpositive(&self) -> bool {
        self.a1 <= 0.0
    }

    pub fn b3_negative(&self) -> bool {
        strictly_less(self.b3, 0.0)
    }

    /// `4 a1 a3 - a2^2 >= 0` when `a1 < 0`; for `a1 = 0` the quartic
    /// block collapses and `a2 = 0, a3 <= 0` is required instead.
    pub fn a_block_ok(&self) -> bool {
        if self.a1 < 0.0 {
            let d = 4.0 * self.a1 * self.a3 - self.a2 * self.a2;
            at_most(0.0, d / (4.0 * self.a1 * self.a3).abs().max(self.a2 * self.a2).max(1.0))
        } else {
            self.a1 == 0.0 && self.a2 == 0.0 && at_most(self.a3, 0.0)
        }
    }

    /// `4 b1 b3 - b2^2 >= 0`.
    pub fn b_block_ok(&self) -> bool {
        let d = 4.0 * self.b1 * self.b3 - self.b2 * self.b2;
        let scale = (4.0 * self.b1 * self.b3).abs().max(self.b2 * self.b2).max(1.0);
        at_most(0.0, d / scale)
    }
}

impl GammaCertificate {
    pub fn v(&self, p: &SystemParams, s: &StateVec) -> f64 {
        let (sigma, b) = (p.sigma(), p.b());
        let (g1, g2, g3, g4) = (self.gamma1, self.gamma2, self.gamma3, self.gamma4);
        let (x, y, z) = (s.x, s.y, s.z);
        g4 * x * x + (g3 - sigma * g1) * y * y + g3 * z * z + g1 * x.powi(4) / (4.0 * sigma)
            - g1 * x * x * z
            - g1 * g2 * x * y
            - sigma / b * z
    }

    /// Derivative of `V` along the flow.
    pub fn v_dot(&self, p: &SystemParams, s: &StateVec) -> f64 {
        let (sigma, b) = (p.sigma(), p.b());
        let (g1, g2, g3, g4) = (self.gamma1, self.gamma2, self.gamma3, self.gamma4);
        let (x, y, z) = (s.x, s.y, s.z);
        let dx = 2.0 * g4 * x + g1 * x.powi(3) / sigma - 2.0 * g1 * x * z - g1 * g2 * y;
        let dy = 2.0 * (g3 - sigma * g1) * y - g1 * g2 * x;
        let dz = 2.0 * g3 * z - g1 * x * x - sigma / b;
        let f = vector_field(p, s);
        dx * f.x + dy * f.y + dz * f.z
    }

    pub fn coefficients(&self, p: &SystemParams) -> RCoefficients {
        let (sigma, r, b) = (p.sigma(), p.r(), p.b());
        let (g1, g2, g3, g4) = (self.gamma1, self.gamma2, self.gamma3, self.gamma4);
        let rho2 = self.rho * self.rho;
        let c1 = rho2 * (b - 1.0).powi(2) / (4.0 * sigma * sigma) - r * g1 * g2;
        let c2 = c2(p, self.rho, g1, g2, g3);
        RCoefficients {
            a1: -g1,
            a2: g1 * (g2 + 2.0 * sigma + b),
            a3: rho2 / 4.0 - 2.0 * b * g3,
            b1: c1 - 2.0 * sigma * g4,
            b2: c2 + 2.0 * sigma * g4,
            b3: b3(p, self.rho, g1, g2, g3),
        }
    }

    /// Re-evaluates the four defining inequalities at the stored gammas.
    pub fn checks(&self, p: &SystemParams) -> CertificateChecks {
        let (g1, g2, g3) = (self.gamma1, self.gamma2, self.gamma3);
        let br = Gamma3Bracket::new(p, self.rho, g1, g2);
        CertificateChecks {
            gamma1_nonnegative: g1 >= 0.0,
            gamma3_strict_lower: strictly_less(br.strict_lower, g3),
            gamma3_lower: at_most(br.lower, g3),
            gamma3_upper: at_most(g3, br.upper),
        }
    }

    /// `theta = (1 - s) V / sqrt((sigma - 1)^2 + 4 sigma r)`.
    pub fn theta(&self, p: &SystemParams, s: f64, state: &StateVec) -> f64 {
        (1.0 - s) * self.v(p, state) / p.origin_discriminant_root()
    }

    pub fn theta_dot(&self, p: &SystemParams, s: f64, state: &StateVec) -> f64 {
        (1.0 - s) * self.v_dot(p, state) / p.origin_discriminant_root()
    }
}

fn b3(p: &SystemParams, rho: f64, g1: f64, g2: f64, g3: f64) -> f64 {
    let sigma = p.sigma();
    2.0 * sigma * g1 - 2.0 * g3 - sigma * g1 * g2 + rho * rho / 4.0
}

fn c2(p: &SystemParams, rho: f64, g1: f64, g2: f64, g3: f64) -> f64 {
    let (sigma, r, b) = (p.sigma(), p.r(), p.b());
    rho * rho * (b - 1.0) / (2.0 * sigma) + g1 * g2 - 2.0 * r * sigma * g1 + 2.0 * r * g3 + sigma * g1 * g2 - sigma / b
}

/// Bounds on `gamma3` for given `gamma1, gamma2` (requires `r > 1`).
struct Gamma3Bracket {
    strict_lower: f64,
    lower: f64,
    upper: f64,
}

impl Gamma3Bracket {
    fn new(p: &SystemParams, rho: f64, g1: f64, g2: f64) -> Self {
        let (sigma, r, b) = (p.sigma(), p.r(), p.b());
        let rho2 = rho * rho;
        let rm1 = r - 1.0;
        Self {
            strict_lower: 0.5 * (rho2 / 4.0 + 2.0 * sigma * g1 - sigma * g1 * g2),
            lower: 0.5 * (rho2 / (4.0 * b) + g1 * (g2 + 2.0 * sigma + b).powi(2) / (4.0 * b)),
            upper: 0.5
                * (2.0 * sigma * g1 + g1 * g2 - rho2 * (b + sigma - 1.0).powi(2) / (4.0 * sigma * sigma * rm1)
                    + sigma / (b * rm1)),
        }
    }
}

/// `rho^2 (b+sigma-1)^2 / (4 sigma^2 (r-1)) - sigma / (b (r-1))`.
fn shared_term(p: &SystemParams, rho: f64) -> f64 {
    let (sigma, r, b) = (p.sigma(), p.r(), p.b());
    let rm1 = r - 1.0;
    rho * rho * (b + sigma - 1.0).powi(2) / (4.0 * sigma * sigma * rm1) - sigma / (b * rm1)
}

fn no_certificate(parameter: &'static str, lower: f64, upper: f64) -> Error {
    Error::NoCertificate { parameter, lower, upper }
}

/// Constructs a certificate, or `None` when the theorem conditions fail.
///
/// Fails with [`Error::NoCertificate`] if an interval that should be
/// non-empty collapses at working precision.
pub fn find_gamma_certificate(p: &SystemParams) -> Result<Option<GammaCertificate>> {
    if check_conditions(p).outcome == Outcome::ConditionsFail {
        return Ok(None);
    }
    let (sigma, b) = (p.sigma(), p.b());
    let rho = rho(p)?;
    let shared = shared_term(p, rho);
    let e1 = rho * rho / 4.0 + shared;
    let e2 = rho * rho / (4.0 * b) + shared;
    let shift = 2.0 * sigma - b;
    let k1 = k1(p);

    let (branch, g1, g2) = if strictly_less(k1, 0.0) && e1 < 0.0 {
        let upper = if shift == 0.0 || e2 >= 0.0 { 0.0 } else { -4.0 * b * e2 / (shift * shift) };
        (CertificateBranch::ZeroGamma2, 0.5 * upper, 0.0)
    } else {
        let (branch, g2) = match gamma_quadratic_roots(p) {
            Ok(Some((lo, hi))) => {
                let left = lo.max(0.0);
                if !(left < hi) || k1 <= 0.0 {
                    return Err(no_certificate("gamma2", left, hi));
                }
                let mut g2 = 0.5 * (left + hi);
                if g2 == b - 2.0 * sigma {
                    g2 = left + 0.25 * (hi - left);
                }
                (CertificateBranch::PositiveGamma2, g2)
            }
            Ok(None) => return Err(no_certificate("gamma2", f64::NAN, f64::NAN)),
            Err(Error::DegenerateQuadratic { feasible: true }) => {
                (CertificateBranch::DegenerateQuadratic, 2.0 * sigma + b)
            }
            Err(Error::DegenerateQuadratic { feasible: false }) => {
                return Err(no_certificate("gamma2", 0.0, 0.0));
            }
            Err(e) => return Err(e),
        };
        let lower = (e1 / (g2 * (sigma + 1.0))).max(0.0);
        let upper = -4.0 * b * e2 / (shift + g2).powi(2);
        if !(lower < upper) {
            return Err(no_certificate("gamma1", lower, upper));
        }
        (branch, 0.5 * (lower + upper), g2)
    };

    let br = Gamma3Bracket::new(p, rho, g1, g2);
    if !(br.strict_lower < br.upper) || br.lower > br.upper {
        return Err(no_certificate("gamma3", br.strict_lower.max(br.lower), br.upper));
    }
    let g3 = 0.5 * (br.strict_lower.max(br.lower) + br.upper);
    let g4 = (-2.0 * b3(p, rho, g1, g2, g3) - c2(p, rho, g1, g2, g3)) / (2.0 * sigma);
    Ok(Some(GammaCertificate {
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        gamma4: g4,
        rho,
        s0: s0(p),
        branch,
    }))
}

/// `R` evaluated from its definition, with `dV/dt` from the gradient.
pub fn r_direct(p: &SystemParams, c: &GammaCertificate, s: &StateVec) -> f64 {
    let rho2 = c.rho * c.rho;
    let shear = s.y + (p.b() - 1.0) * s.x / p.sigma();
    -p.sigma() * s.z + rho2 * s.z * s.z / 4.0 + rho2 / 4.0 * shear * shear + c.v_dot(p, s)
}

/// `R` evaluated from its polynomial coefficients.
pub fn r_coefficient_form(p: &SystemParams, c: &GammaCertificate, s: &StateVec) -> f64 {
    c.coefficients(p).eval(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RReport {
    pub samples: usize,
    pub max_r: f64,
    pub argmax: StateVec,
    pub a1_nonpositive: bool,
    pub b3_negative: bool,
    pub a_block: bool,
    pub b_block: bool,
}

impl RReport {
    pub fn coefficients_ok(&self) -> bool {
        self.a1_nonpositive && self.b3_negative && self.a_block && self.b_block
    }

    pub fn passed(&self) -> bool {
        self.coefficients_ok() && self.max_r <= R_SLACK
    }
}

/// Samples `R` on a box three times the absorbing ball's radius and checks
/// the coefficient conditions that make it non-positive everywhere.
pub fn verify_r_nonpositive(p: &SystemParams, c: &GammaCertificate, samples: usize) -> RReport {
    let coeffs = c.coefficients(p);
    let ball = absorbing_ball(p);
    let mut q = QuasiRandom::new(SAMPLE_SEED, 0);
    let mut max_r = coeffs.eval(&StateVec::ORIGIN);
    let mut argmax = StateVec::ORIGIN;
    for _ in 0..samples {
        let s = q.next_in_box(&ball.center, BOX_FACTOR * ball.radius);
        let v = coeffs.eval(&s);
        if v > max_r {
            max_r = v;
            argmax = s;
        }
    }
    RReport {
        samples,
        max_r,
        argmax,
        a1_nonpositive: coeffs.a1_nonpositive(),
        b3_negative: coeffs.b3_negative(),
        a_block: coeffs.a_block_ok(),
        b_block: coeffs.b_block_ok(),
    }
}

/// `2 (l1 + l2 + s l3) + 2 dtheta/dt` at `state`, with `l_i` the
/// symmetrised eigenvalues.
pub fn dimension_bound_lhs(p: &SystemParams, c: &GammaCertificate, s: f64, state: &StateVec) -> Result<f64> {
    let l = symmetrized_eigenvalues(p, state)?;
    Ok(2.0 * (l[0] + l[1] + s * l[2]) + 2.0 * c.theta_dot(p, s, state))
}

/// State-independent upper bound for [`dimension_bound_lhs`]; negative
/// exactly when `s > s0`.
pub fn dimension_bound_rhs(p: &SystemParams, s: f64) -> f64 {
    let (sigma, b) = (p.sigma(), p.b());
    let root = p.origin_discriminant_root();
    -(sigma + 2.0 * b + 1.0) - s * (sigma + 1.0) + (1.0 - s) * root
}
