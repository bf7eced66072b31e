//! Serializable results of each subcommand and their plain-text rendering.

use std::fmt::{self, Write as _};

use lyapdim::lyap::{FiniteTimeDim, GridDimension, LeSpectrum, LocalDimension};
use lyapdim::model::{AbsorbingBall, EquilibriumLabel};
use lyapdim::theory::{CertificateChecks, GammaCertificate, RReport, TheoremVerdict};
use lyapdim::{StateVec, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Transient,
    Attractor,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Segment::Transient => "transient",
            Segment::Attractor => "attractor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesReport {
    pub params: SystemParams,
    pub start: StateVec,
    pub estimator: String,
    pub spectrum: LeSpectrum,
    pub dimension: FiniteTimeDim,
    /// `sum(LE) + (sigma + 1 + b)`.
    pub trace_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub params: SystemParams,
    pub start: StateVec,
    pub local: LocalDimension,
    pub trace_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub params: SystemParams,
    pub seeds: Vec<StateVec>,
    pub grid: GridDimension,
    pub formula: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub params: SystemParams,
    pub verdict: TheoremVerdict,
    pub formula: f64,
    pub s0: f64,
    pub lemma2_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub params: SystemParams,
    pub verdict: TheoremVerdict,
    pub certificate: GammaCertificate,
    pub checks: CertificateChecks,
    pub verification: RReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumInfo {
    pub label: EquilibriumLabel,
    pub state: StateVec,
    /// `(re, im)` pairs sorted by real part, descending.
    pub eigenvalues: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaReport {
    pub params: SystemParams,
    pub equilibria: Vec<EquilibriumInfo>,
    pub absorbing_ball: AbsorbingBall,
}

fn fmt_triple(v: &[f64; 3]) -> String {
    format!("{:.6} {:.6} {:.6}", v[0], v[1], v[2])
}

impl LesReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "params      {}", self.params);
        let _ = writeln!(s, "start       {}", self.start);
        let _ = writeln!(s, "estimator   {}", self.estimator);
        let _ = writeln!(s, "horizon     {}", self.spectrum.horizon);
        let _ = writeln!(s, "exponents   {}", fmt_triple(&self.spectrum.exponents));
        let _ = writeln!(s, "dimension   {:.6}", self.dimension.value);
        let _ = writeln!(s, "residual    {:.3e}", self.trace_residual);
        s
    }
}

impl DimReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "params      {}", self.params);
        let _ = writeln!(s, "start       {}", self.start);
        let _ = writeln!(s, "exponents   {}", fmt_triple(&self.local.spectrum.exponents));
        let _ = writeln!(s, "dimension   {:.6}", self.local.final_dim.value);
        let _ = writeln!(s, "limsup      {:.6}", self.local.limsup);
        let _ = writeln!(s, "residual    {:.3e}", self.trace_residual);
        s
    }
}

impl GridReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "params      {}", self.params);
        let _ = writeln!(s, "seeds       {} ({} skipped)", self.seeds.len(), self.grid.skipped.len());
        let _ = writeln!(s, "dimension   {:.6}", self.grid.value);
        let _ = writeln!(s, "argmax      #{} {}", self.grid.argmax_index, self.grid.argmax_seed);
        let _ = writeln!(s, "formula     {:.6}", self.formula);
        s
    }
}

impl CheckReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.verdict);
        let _ = writeln!(s, "params      {}", self.params);
        for c in &self.verdict.checks {
            let _ = writeln!(s, "  {c}");
        }
        let _ = writeln!(s, "branch      {}", self.verdict.branch);
        if self.verdict.case_boundary {
            let _ = writeln!(s, "note        case-A inequality holds with equality");
        }
        let _ = writeln!(s, "formula     {:.6}", self.formula);
        let _ = writeln!(s, "s0          {:.6}", self.s0);
        let _ = writeln!(s, "lemma2 box  {}", self.lemma2_domain);
        s
    }
}

impl CertifyReport {
    pub fn to_text(&self) -> String {
        let c = &self.certificate;
        let v = &self.verification;
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.verdict);
        let _ = writeln!(s, "params      {}", self.params);
        for check in &self.verdict.checks {
            let _ = writeln!(s, "  {check}");
        }
        let _ = writeln!(s, "gamma branch {:?}", c.branch);
        let _ = writeln!(s, "gamma1      {:.9e}", c.gamma1);
        let _ = writeln!(s, "gamma2      {:.9e}", c.gamma2);
        let _ = writeln!(s, "gamma3      {:.9e}", c.gamma3);
        let _ = writeln!(s, "gamma4      {:.9e}", c.gamma4);
        let _ = writeln!(s, "rho         {:.9}", c.rho);
        let _ = writeln!(s, "s0          {:.9}", c.s0);
        let _ = writeln!(s, "inequalities {}", if self.checks.all() { "pass" } else { "FAIL" });
        let _ = writeln!(
            s,
            "coefficients A1<=0 {} B3<0 {} A-block {} B-block {}",
            v.a1_nonpositive, v.b3_negative, v.a_block, v.b_block
        );
        let _ = writeln!(s, "max R       {:.3e} over {} samples at {}", v.max_r, v.samples, v.argmax);
        let _ = writeln!(s, "verified    {}", v.passed());
        s
    }
}

impl EquilibriaReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "params      {}", self.params);
        for e in &self.equilibria {
            let eig: Vec<String> = e
                .eigenvalues
                .iter()
                .map(|(re, im)| if *im == 0.0 { format!("{re:.6}") } else { format!("{re:.6}{im:+.6}i") })
                .collect();
            let _ = writeln!(s, "{:<3} {}  eigenvalues {}", e.label, e.state, eig.join(", "));
        }
        let _ = writeln!(
            s,
            "ball        centre {} radius {:.6}",
            self.absorbing_ball.center, self.absorbing_ball.radius
        );
        s
    }
}
