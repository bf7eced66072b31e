//! Closed-form results for the Lorenz system: the dimension formula, the
//! eigenvalues at the origin, the parameter conditions under which the
//! formula is an upper bound, and the Lyapunov-type certificate behind it.

mod certificate;
mod conditions;
mod symmetrized;

pub use certificate::{
    dimension_bound_lhs, dimension_bound_rhs, find_gamma_certificate, r_coefficient_form, r_direct,
    verify_r_nonpositive, CertificateBranch, CertificateChecks, GammaCertificate, RCoefficients, RReport,
    DEFAULT_R_SAMPLES,
};
pub use conditions::{
    check_conditions, eval_gamma_quadratic, gamma_quadratic, gamma_quadratic_roots, prerequisites_hold, Branch, ConditionCheck,
    ConditionId, Outcome, TheoremVerdict,
};
pub use symmetrized::{rho, symmetrized_eigenvalues, symmetrized_jacobian, transform_matrix};

use serde::{Deserialize, Serialize};

use crate::lyap::{kaplan_yorke, FiniteTimeDim, LeSpectrum};
use crate::model::SystemParams;

/// Eigenvalues of the Jacobian at the origin. `lambda2 = -b`; the other two
/// are the roots of the `(x, y)` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginEigenvalues {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl OriginEigenvalues {
    /// Sorted non-increasing. Coincides with `[lambda1, lambda2, lambda3]`
    /// whenever `sigma * r > (b - sigma) * (b - 1)`.
    pub fn sorted(&self) -> [f64; 3] {
        let mut v = [self.lambda1, self.lambda2, self.lambda3];
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Kaplan–Yorke dimension of the linear flow at the origin.
    pub fn dimension(&self) -> FiniteTimeDim {
        kaplan_yorke(&LeSpectrum::new(self.sorted(), f64::INFINITY, 0.0))
    }
}

pub fn origin_eigenvalues(p: &SystemParams) -> OriginEigenvalues {
    let root = p.origin_discriminant_root();
    let s1 = p.sigma() + 1.0;
    OriginEigenvalues {
        lambda1: -0.5 * (s1 - root),
        lambda2: -p.b(),
        lambda3: -0.5 * (s1 + root),
    }
}

/// `3 - 2 (sigma + b + 1) / (sigma + 1 + sqrt((sigma - 1)^2 + 4 sigma r))`.
pub fn dimension_formula(p: &SystemParams) -> f64 {
    let (sigma, b) = (p.sigma(), p.b());
    3.0 - 2.0 * (sigma + b + 1.0) / (sigma + 1.0 + p.origin_discriminant_root())
}

/// Critical fraction: the dimension is bounded by `2 + s` for every
/// `s > s0`. Equals `dimension_formula - 2`.
pub fn s0(p: &SystemParams) -> f64 {
    let (sigma, b) = (p.sigma(), p.b());
    let root = p.origin_discriminant_root();
    (-(sigma + 2.0 * b + 1.0) + root) / (sigma + 1.0 + root)
}

/// Membership in the box `r > 1, sigma > 7, 0 < b < 4` on which the
/// theorem prerequisites are known to hold.
pub fn lemma2_domain_check(p: &SystemParams) -> bool {
    p.r() > 1.0 && p.sigma() > 7.0 && p.b() > 0.0 && p.b() < 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Audit {
    pub in_domain: bool,
    pub verdict: TheoremVerdict,
}

impl Lemma2Audit {
    /// In-domain points must satisfy the prerequisites and must not fail.
    pub fn consistent(&self) -> bool {
        !self.in_domain
            || (self.verdict.branch != Branch::None && self.verdict.outcome != Outcome::ConditionsFail)
    }
}

pub fn lemma2_audit(p: &SystemParams) -> Lemma2Audit {
    Lemma2Audit {
        in_domain: lemma2_domain_check(p),
        verdict: check_conditions(p),
    }
}

/// Smallest `r` in `r_grid` (scanned in the given order, expected
/// increasing) such that the prerequisites hold at every cell centre of
/// `sigma_range x (0, 4 - eps)` and at every larger grid value.
pub fn r_star_search(eps: f64, sigma_range: (f64, f64), cells: usize, r_grid: &[f64]) -> Option<f64> {
    if !(eps > 0.0 && eps < 4.0) || cells == 0 || sigma_range.0 <= 0.0 || sigma_range.1 <= sigma_range.0 {
        return None;
    }
    let b_max = 4.0 - eps;
    let all_hold = |r: f64| {
        (0..cells).all(|i| {
            let sigma = sigma_range.0 + (i as f64 + 0.5) * (sigma_range.1 - sigma_range.0) / cells as f64;
            (0..cells).all(|j| {
                let b = (j as f64 + 0.5) * b_max / cells as f64;
                SystemParams::new(sigma, r, b).is_ok_and(|p| prerequisites_hold(&p))
            })
        })
    };
    let mut answer = None;
    for &r in r_grid.iter().rev() {
        if all_hold(r) {
            answer = Some(r);
        } else {
            break;
        }
    }
    answer
}
