//! Parameter-plane classification and trajectory-level chaos probing.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::lyap::run_qr;
use crate::model::{absorbing_ball, equilibria, EquilibriumLabel, StateVec, SystemParams};
use crate::sampling::QuasiRandom;
use crate::theory::{check_conditions, Outcome};

/// Distance below which a trajectory counts as sitting on an equilibrium.
pub const CAPTURE_DISTANCE: f64 = 1e-3;
/// How long it must stay there.
pub const CAPTURE_DWELL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Sigma,
    R,
    B,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma" | "s" => Ok(Param::Sigma),
            "r" => Ok(Param::R),
            "b" => Ok(Param::B),
            other => Err(Error::InvalidScan(format!("unknown parameter `{other}` (sigma, r, b)"))),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Sigma => "sigma",
            Param::R => "r",
            Param::B => "b",
        })
    }
}

/// `cells` equal cells spanning `[min, max]`; values are taken at centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl AxisRange {
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * (self.max - self.min) / self.cells as f64
    }

    /// Same span with twice as many cells.
    pub fn refined(&self) -> Self {
        Self {
            cells: 2 * self.cells,
            ..*self
        }
    }
}

impl FromStr for AxisRange {
    type Err = Error;

    /// `param:min:max:cells`, e.g. `sigma:0:20:100`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [param, min, max, cells] = parts.as_slice() else {
            return Err(Error::InvalidScan(format!("expected param:min:max:cells, got `{s}`")));
        };
        let num = |t: &str| crate::model::parse_real(t).map_err(|e| Error::InvalidScan(e.to_string()));
        Ok(Self {
            param: param.parse()?,
            min: num(min)?,
            max: num(max)?,
            cells: cells
                .trim()
                .parse()
                .map_err(|_| Error::InvalidScan(format!("bad cell count `{cells}`")))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRequest {
    pub fixed: Param,
    pub fixed_value: f64,
    pub axis1: AxisRange,
    pub axis2: AxisRange,
}

impl ScanRequest {
    pub fn validate(&self) -> Result<()> {
        let p = [self.fixed, self.axis1.param, self.axis2.param];
        if p[0] == p[1] || p[0] == p[2] || p[1] == p[2] {
            return Err(Error::InvalidScan("fixed parameter and axes must be distinct".into()));
        }
        if !(self.fixed_value.is_finite() && self.fixed_value > 0.0) {
            return Err(Error::InvalidScan(format!(
                "fixed {} must be positive, got {}",
                self.fixed, self.fixed_value
            )));
        }
        for a in [&self.axis1, &self.axis2] {
            if !(a.min.is_finite() && a.max.is_finite() && a.min >= 0.0 && a.min < a.max) {
                return Err(Error::InvalidScan(format!(
                    "{} range must satisfy 0 <= min < max, got [{}, {}]",
                    a.param, a.min, a.max
                )));
            }
            if a.cells < 2 {
                return Err(Error::InvalidScan(format!("{} needs at least 2 cells", a.param)));
            }
        }
        Ok(())
    }

    pub fn params_at(&self, v1: f64, v2: f64) -> Result<SystemParams> {
        let mut vals = [0.0; 3];
        for (param, v) in [(self.fixed, self.fixed_value), (self.axis1.param, v1), (self.axis2.param, v2)] {
            vals[param as usize] = v;
        }
        SystemParams::new(vals[0], vals[1], vals[2])
    }

    pub fn refined(&self) -> Self {
        Self {
            axis1: self.axis1.refined(),
            axis2: self.axis2.refined(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Formula,
    Equilibria,
    Fail,
}

impl From<Outcome> for Verdict {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::FormulaHolds => Verdict::Formula,
            Outcome::ConvergesToEquilibria => Verdict::Equilibria,
            Outcome::ConditionsFail => Verdict::Fail,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Formula => "formula",
            Verdict::Equilibria => "equilibria",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub axis1: f64,
    pub axis2: f64,
    pub verdict: Verdict,
    pub bound: Option<f64>,
}

/// Classifies every cell centre, row-major with `axis1` as the row index.
pub fn run_scan(req: &ScanRequest) -> Result<Vec<ScanCell>> {
    req.validate()?;
    let (n1, n2) = (req.axis1.cells, req.axis2.cells);
    (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (v1, v2) = (req.axis1.center(k / n2), req.axis2.center(k % n2));
            let verdict = check_conditions(&req.params_at(v1, v2)?);
            Ok(ScanCell {
                axis1: v1,
                axis2: v2,
                verdict: verdict.outcome.into(),
                bound: verdict.bound,
            })
        })
        .collect()
}

/// Cells of `fine` (the 2x refinement of `coarse`) whose verdict differs
/// from a coarse parent that agrees with all four of its edge neighbours.
/// Parents on the grid border have fewer than four neighbours and are not
/// considered settled.
pub fn refinement_conflicts(req: &ScanRequest, coarse: &[ScanCell], fine: &[ScanCell]) -> Vec<usize> {
    let (n1, n2) = (req.axis1.cells, req.axis2.cells);
    let at = |i: usize, j: usize| coarse[i * n2 + j].verdict;
    let settled = |i: usize, j: usize| {
        let v = at(i, j);
        let neighbours = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        neighbours.iter().all(|&(a, b)| a < n1 && b < n2 && at(a, b) == v)
    };
    let m2 = 2 * n2;
    fine.iter()
        .enumerate()
        .filter_map(|(k, cell)| {
            let (i, j) = ((k / m2) / 2, (k % m2) / 2);
            (settled(i, j) && cell.verdict != at(i, j)).then_some(k)
        })
        .collect()
}

pub fn write_csv<W: Write>(cells: &[ScanCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis1", "axis2", "verdict", "bound"])?;
    for c in cells {
        w.write_record([
            c.axis1.to_string(),
            c.axis2.to_string(),
            c.verdict.to_string(),
            c.bound.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(cells: &[ScanCell], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, cells)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedProbe {
    pub start: StateVec,
    /// Largest finite-time exponent; `None` if the trajectory diverged.
    pub largest_le: Option<f64>,
    pub exponents: Option<[f64; 3]>,
    /// Equilibrium holding the trajectory for the final dwell period.
    pub captured_by: Option<EquilibriumLabel>,
    pub final_state: Option<StateVec>,
    /// Distance from the endpoint to the nearest equilibrium.
    pub final_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub params: SystemParams,
    pub horizon: f64,
    pub seeds: Vec<SeedProbe>,
}

impl ChaosReport {
    pub fn captured(&self) -> usize {
        self.seeds.iter().filter(|s| s.captured_by.is_some()).count()
    }
}

/// Integrates from `start` for `horizon`, recording the largest exponent and
/// whether the trajectory ends on an equilibrium.
pub fn probe_seed(p: &SystemParams, start: &StateVec, horizon: f64, cfg: &IntegratorConfig) -> Result<SeedProbe> {
    let eq = equilibria(p);
    let mut inside_since: Option<f64> = None;
    let run = run_qr(p, start, horizon, 0.0, cfg, |t, s| {
        let (_, d) = eq.nearest(s);
        if d < CAPTURE_DISTANCE {
            inside_since.get_or_insert(t);
        } else {
            inside_since = None;
        }
    });
    match run {
        Ok(run) => {
            let (label, d) = eq.nearest(&run.final_state);
            let end = run.spectrum.horizon;
            let captured = inside_since.is_some_and(|t0| end - t0 >= CAPTURE_DWELL);
            Ok(SeedProbe {
                start: *start,
                largest_le: Some(run.spectrum.largest()),
                exponents: Some(run.spectrum.exponents),
                captured_by: captured.then_some(label),
                final_state: Some(run.final_state),
                final_distance: Some(d),
                error: None,
            })
        }
        Err(e @ Error::NonFiniteState { .. }) => Ok(SeedProbe {
            start: *start,
            largest_le: None,
            exponents: None,
            captured_by: None,
            final_state: None,
            final_distance: None,
            error: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

pub fn probe_seeds(
    p: &SystemParams,
    starts: &[StateVec],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<ChaosReport> {
    if starts.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let seeds = starts
        .par_iter()
        .map(|s| probe_seed(p, s, horizon, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChaosReport {
        params: *p,
        horizon,
        seeds,
    })
}

/// `seeds` quasi-random starting points from the absorbing ball.
pub fn ball_seeds(p: &SystemParams, seeds: usize, rng_seed: u64) -> Vec<StateVec> {
    let ball = absorbing_ball(p);
    let mut q = QuasiRandom::new(rng_seed, 0);
    (0..seeds).map(|_| q.next_in_ball(&ball.center, ball.radius)).collect()
}

/// [`probe_seeds`] on points sampled from the absorbing ball.
pub fn chaos_probe(
    p: &SystemParams,
    seeds: usize,
    horizon: f64,
    cfg: &IntegratorConfig,
    rng_seed: u64,
) -> Result<ChaosReport> {
    probe_seeds(p, &ball_seeds(p, seeds, rng_seed), horizon, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(cells: usize) -> ScanRequest {
        ScanRequest {
            fixed: Param::R,
            fixed_value: 28.0,
            axis1: AxisRange {
                param: Param::Sigma,
                min: 0.0,
                max: 20.0,
                cells,
            },
            axis2: AxisRange {
                param: Param::B,
                min: 0.0,
                max: 8.0,
                cells,
            },
        }
    }

    #[test]
    fn axis_parsing() {
        let a: AxisRange = "sigma:0:20:100".parse().unwrap();
        assert_eq!(a.param, Param::Sigma);
        assert_eq!(a.cells, 100);
        let b: AxisRange = "b:0:8/3:4".parse().unwrap();
        assert_eq!(b.max, 8.0 / 3.0);
        assert!("x:0:1:2".parse::<AxisRange>().is_err());
        assert!("r:0:1".parse::<AxisRange>().is_err());
    }

    #[test]
    fn validation() {
        let mut r = request(10);
        assert!(r.validate().is_ok());
        r.axis1.cells = 1;
        assert!(r.validate().is_err());
        let mut r = request(10);
        r.axis2.min = 9.0;
        assert!(r.validate().is_err());
        let mut r = request(10);
        r.axis2.param = Param::Sigma;
        assert!(r.validate().is_err());
        assert!(run_scan(&r).is_err());
    }

    #[test]
    fn params_placement() {
        let r = request(10);
        let p = r.params_at(10.0, 2.0).unwrap();
        assert_eq!((p.sigma(), p.r(), p.b()), (10.0, 28.0, 2.0));
    }

    #[test]
    fn classical_cell_is_formula() {
        let req = request(100);
        let cells = run_scan(&req).unwrap();
        assert_eq!(cells.len(), 10_000);
        // sigma = 10 lies on a cell edge; both neighbouring columns qualify.
        let i = (10.0f64 / 0.2).floor() as usize;
        let j = ((8.0 / 3.0) / 0.08f64).floor() as usize;
        assert_eq!(cells[i * 100 + j].verdict, Verdict::Formula);
        assert_eq!(cells[(i - 1) * 100 + j].verdict, Verdict::Formula);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let cells = run_scan(&request(3)).unwrap();
        let mut buf = Vec::new();
        write_csv(&cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("axis1,axis2,verdict,bound\n"));
        assert_eq!(text.lines().count(), 10);
        let mut buf = Vec::new();
        write_json(&cells, &mut buf).unwrap();
        let back: Vec<ScanCell> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, cells);
        let raw: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let tags: Vec<&str> = raw.as_array().unwrap().iter().map(|c| c["verdict"].as_str().unwrap()).collect();
        assert!(tags.iter().all(|t| ["formula", "equilibria", "fail"].contains(t)));
    }

    #[test]
    fn refinement_is_stable() {
        let req = request(20);
        let coarse = run_scan(&req).unwrap();
        let fine = run_scan(&req.refined()).unwrap();
        let bad = refinement_conflicts(&req, &coarse, &fine);
        let show: Vec<_> = bad.iter().map(|&k| fine[k]).collect();
        assert!(bad.is_empty(), "{show:?}");
    }

    #[test]
    fn stable_regime_seeds_are_captured() {
        let p = SystemParams::new(10.0, 3.0, 8.0 / 3.0).unwrap();
        let cfg = IntegratorConfig::rk4(0.005).unwrap();
        let rep = chaos_probe(&p, 4, 100.0, &cfg, 1).unwrap();
        for s in &rep.seeds {
            assert!(matches!(s.captured_by, Some(EquilibriumLabel::S1 | EquilibriumLabel::S2)), "{s:?}");
            assert!(s.largest_le.unwrap() < 0.0);
        }
    }

    #[test]
    fn probe_is_deterministic() {
        let p = SystemParams::new(10.0, 3.0, 8.0 / 3.0).unwrap();
        let cfg = IntegratorConfig::rk4(0.01).unwrap();
        let a = chaos_probe(&p, 3, 50.0, &cfg, 9).unwrap();
        let b = chaos_probe(&p, 3, 50.0, &cfg, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
