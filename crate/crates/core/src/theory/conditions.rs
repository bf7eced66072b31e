//! Parameter conditions under which every bounded solution settles on an
//! equilibrium, or under which the dimension formula bounds every bounded
//! invariant set.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::dimension_formula;
use crate::error::{Error, Result};
use crate::model::SystemParams;

const REL_SLACK: f64 = 1e-12;

fn slack(a: f64, b: f64) -> f64 {
    REL_SLACK * 1f64.max(a.abs()).max(b.abs())
}

pub(crate) fn strictly_less(a: f64, b: f64) -> bool {
    a < b - slack(a, b)
}

pub(crate) fn at_most(a: f64, b: f64) -> bool {
    a <= b + slack(a, b)
}

/// Labels follow the numbering used in the literature for this theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// `r - 1 > 0`
    #[serde(rename = "(7)")]
    RPositive,
    /// `r - 1 >= (b(b+sigma-1)^2 - 4 sigma (b + sigma b - b^2)) / (3 sigma^2)`
    #[serde(rename = "(8)")]
    RLowerBound,
    /// `sigma^2 (r-1)(b-4) <= 4 sigma (sigma b + b - b^2) - b (b+sigma-1)^2`
    #[serde(rename = "(9)")]
    CaseA,
    /// The gamma quadratic has two distinct roots, its leading coefficient
    /// is positive and the larger root is positive.
    #[serde(rename = "(10)-(11)")]
    CaseB,
    /// `(b - sigma)(b - 1) < sigma r < (b + 1)(b + sigma)`
    #[serde(rename = "(12)")]
    Equilibria,
    /// `sigma r > (b + 1)(b + sigma)`
    #[serde(rename = "(13)")]
    Formula,
}

impl ConditionId {
    pub fn label(self) -> &'static str {
        match self {
            ConditionId::RPositive => "(7)",
            ConditionId::RLowerBound => "(8)",
            ConditionId::CaseA => "(9)",
            ConditionId::CaseB => "(10)-(11)",
            ConditionId::Equilibria => "(12)",
            ConditionId::Formula => "(13)",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    CaseA,
    CaseB,
    None,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::CaseA => "CaseA",
            Branch::CaseB => "CaseB",
            Branch::None => "None",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    FormulaHolds,
    ConvergesToEquilibria,
    ConditionsFail,
}

impl Outcome {
    /// Short tag used in scan output.
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::FormulaHolds => "formula",
            Outcome::ConvergesToEquilibria => "equilibria",
            Outcome::ConditionsFail => "fail",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::FormulaHolds => "FormulaHolds",
            Outcome::ConvergesToEquilibria => "ConvergesToEquilibria",
            Outcome::ConditionsFail => "ConditionsFail",
        })
    }
}

/// One evaluated inequality `lower < lhs (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub id: ConditionId,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    /// Left end of a two-sided condition.
    pub lower: Option<f64>,
    pub holds: bool,
}

impl fmt::Display for ConditionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "pass" } else { "fail" };
        match self.lower {
            Some(lo) => write!(
                f,
                "{:<10} {lo:.6} < {:.6} {} {:.6}  {verdict}",
                self.id, self.lhs, self.relation, self.rhs
            ),
            None => write!(f, "{:<10} {:.6} {} {:.6}  {verdict}", self.id, self.lhs, self.relation, self.rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub outcome: Outcome,
    pub satisfied: Vec<ConditionId>,
    pub branch: Branch,
    /// The formula value, present exactly when the formula holds.
    pub bound: Option<f64>,
    pub checks: Vec<ConditionCheck>,
    /// Set when the case-A inequality holds only with equality (up to
    /// rounding); such points are assigned to case A.
    pub case_boundary: bool,
}

impl TheoremVerdict {
    pub fn holds(&self, id: ConditionId) -> bool {
        self.satisfied.contains(&id)
    }

    /// Conditions whose failure caused `ConditionsFail`; empty otherwise.
    pub fn failed(&self) -> Vec<ConditionId> {
        if self.outcome != Outcome::ConditionsFail {
            return Vec::new();
        }
        let mut out = Vec::new();
        for id in [ConditionId::RPositive, ConditionId::RLowerBound] {
            if !self.holds(id) {
                out.push(id);
            }
        }
        if self.branch == Branch::None {
            out.extend([ConditionId::CaseA, ConditionId::CaseB]);
        }
        if !self.holds(ConditionId::Equilibria) && !self.holds(ConditionId::Formula) {
            out.extend([ConditionId::Equilibria, ConditionId::Formula]);
        }
        out
    }
}

impl fmt::Display for TheoremVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.outcome {
            Outcome::FormulaHolds => write!(
                f,
                "FormulaHolds, {}, bound {:.6}",
                self.branch,
                self.bound.unwrap_or(f64::NAN)
            ),
            Outcome::ConvergesToEquilibria => write!(f, "ConvergesToEquilibria, {}", self.branch),
            Outcome::ConditionsFail => {
                let ids: Vec<&str> = self.failed().iter().map(|c| c.label()).collect();
                write!(f, "ConditionsFail: {}", ids.join(", "))
            }
        }
    }
}

/// Leading coefficient of the gamma quadratic; its sign separates case A
/// (`<= 0`) from case B.
pub(crate) fn k1(p: &SystemParams) -> f64 {
    let (s, r, b) = (p.sigma(), p.r(), p.b());
    s * s * (r - 1.0) * (b - 4.0) + b * (b + s - 1.0).powi(2) - 4.0 * s * (s * b + b - b * b)
}

/// Second bracket of the gamma quadratic.
pub(crate) fn k2(p: &SystemParams) -> f64 {
    let (s, r, b) = (p.sigma(), p.r(), p.b());
    b * (b + s - 1.0).powi(2) - 4.0 * s * (s * b + b - b * b) - 3.0 * s * s * (r - 1.0)
}

fn k1_scale(p: &SystemParams) -> f64 {
    let (s, r, b) = (p.sigma(), p.r(), p.b());
    (s * s * (r - 1.0) * (b - 4.0)).abs() + b * (b + s - 1.0).powi(2) + (4.0 * s * (s * b + b - b * b)).abs()
}

/// Coefficients `(a, b, c)` of
/// `K1 (2 sigma - b + g)^2 + 4 b g (sigma + 1) K2` as a polynomial in `g`.
pub fn gamma_quadratic(p: &SystemParams) -> [f64; 3] {
    let (s, b) = (p.sigma(), p.b());
    let (k1, k2) = (k1(p), k2(p));
    let shift = 2.0 * s - b;
    [k1, 2.0 * shift * k1 + 4.0 * b * (s + 1.0) * k2, shift * shift * k1]
}

pub fn eval_gamma_quadratic(c: &[f64; 3], g: f64) -> f64 {
    (c[0] * g + c[1]) * g + c[2]
}

/// Real roots `(lo, hi)` of the gamma quadratic, `None` when complex.
///
/// A vanishing leading coefficient is reported as
/// [`Error::DegenerateQuadratic`]; `feasible` then says whether the
/// remaining linear inequality holds for every positive gamma.
pub fn gamma_quadratic_roots(p: &SystemParams) -> Result<Option<(f64, f64)>> {
    let [a, b, c] = gamma_quadratic(p);
    if a.abs() <= REL_SLACK * k1_scale(p) {
        return Err(Error::DegenerateQuadratic { feasible: k2(p) < 0.0 });
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Ok(None);
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Ok(Some((x1.min(x2), x1.max(x2))))
}

fn distinct_roots(p: &SystemParams) -> Option<(f64, f64)> {
    let [a, b, c] = gamma_quadratic(p);
    let disc = b * b - 4.0 * a * c;
    if disc <= REL_SLACK * (b * b + (4.0 * a * c).abs()) {
        return None;
    }
    gamma_quadratic_roots(p).ok().flatten()
}

/// `(7)`, `(8)` and one of the two cases.
pub fn prerequisites_hold(p: &SystemParams) -> bool {
    let v = check_conditions(p);
    v.holds(ConditionId::RPositive) && v.holds(ConditionId::RLowerBound) && v.branch != Branch::None
}

pub fn check_conditions(p: &SystemParams) -> TheoremVerdict {
    let (s, r, b) = (p.sigma(), p.r(), p.b());
    let mut checks = Vec::with_capacity(6);

    let c7 = strictly_less(0.0, r - 1.0);
    checks.push(ConditionCheck {
        id: ConditionId::RPositive,
        lhs: r - 1.0,
        relation: ">".into(),
        rhs: 0.0,
        lower: None,
        holds: c7,
    });

    let rhs8 = (b * (b + s - 1.0).powi(2) - 4.0 * s * (b + s * b - b * b)) / (3.0 * s * s);
    let c8 = at_most(rhs8, r - 1.0);
    checks.push(ConditionCheck {
        id: ConditionId::RLowerBound,
        lhs: r - 1.0,
        relation: ">=".into(),
        rhs: rhs8,
        lower: None,
        holds: c8,
    });

    let lhs9 = s * s * (r - 1.0) * (b - 4.0);
    let rhs9 = 4.0 * s * (s * b + b - b * b) - b * (b + s - 1.0).powi(2);
    let c9 = at_most(lhs9, rhs9);
    let case_boundary = c9 && !strictly_less(lhs9, rhs9);
    checks.push(ConditionCheck {
        id: ConditionId::CaseA,
        lhs: lhs9,
        relation: "<=".into(),
        rhs: rhs9,
        lower: None,
        holds: c9,
    });

    let mut c10 = false;
    if !c9 {
        let hi = distinct_roots(p).map(|(_, hi)| hi);
        c10 = hi.is_some_and(|h| strictly_less(0.0, h));
        checks.push(ConditionCheck {
            id: ConditionId::CaseB,
            lhs: hi.unwrap_or(f64::NAN),
            relation: ">".into(),
            rhs: 0.0,
            lower: None,
            holds: c10,
        });
    }

    let sr = s * r;
    let upper = (b + 1.0) * (b + s);
    let lower = (b - s) * (b - 1.0);
    let c12 = strictly_less(lower, sr) && strictly_less(sr, upper);
    checks.push(ConditionCheck {
        id: ConditionId::Equilibria,
        lhs: sr,
        relation: "<".into(),
        rhs: upper,
        lower: Some(lower),
        holds: c12,
    });
    let c13 = strictly_less(upper, sr);
    checks.push(ConditionCheck {
        id: ConditionId::Formula,
        lhs: sr,
        relation: ">".into(),
        rhs: upper,
        lower: None,
        holds: c13,
    });

    let branch = if c9 {
        Branch::CaseA
    } else if c10 {
        Branch::CaseB
    } else {
        Branch::None
    };
    let satisfied: Vec<ConditionId> = checks.iter().filter(|c| c.holds).map(|c| c.id).collect();
    let prerequisites = c7 && c8 && branch != Branch::None;
    let outcome = match (prerequisites, c13, c12) {
        (true, true, _) => Outcome::FormulaHolds,
        (true, false, true) => Outcome::ConvergesToEquilibria,
        _ => Outcome::ConditionsFail,
    };
    TheoremVerdict {
        outcome,
        satisfied,
        branch,
        bound: (outcome == Outcome::FormulaHolds).then(|| dimension_formula(p)),
        checks,
        case_boundary,
    }
}
