//! Command-line front end: argument parsing, dispatch and output.

pub mod reports;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use lyapdim::integrate::trajectory;
use lyapdim::lyap::{attractor_samples, kaplan_yorke};
use lyapdim::model::{parse_real, EquilibriumLabel};
use lyapdim::scan::{self, AxisRange, Param};
use lyapdim::theory::{lemma2_domain_check, s0, DEFAULT_R_SAMPLES};
use lyapdim::{
    absorbing_ball, check_conditions, equilibria, find_gamma_certificate, jacobian, le_spectrum_qr, le_spectrum_svd,
    dimension_formula, local_dimension, set_dimension_grid, verify_r_nonpositive, Error, IntegratorConfig, Method,
    ScanRequest, StateVec, SystemParams,
};
use serde::Serialize;

use reports::*;

/// Offset applied to an equilibrium chosen with `--from`.
pub const EQUILIBRIUM_OFFSET: f64 = 1e-3;
pub const THREADS_ENV: &str = "LYAPDIM_THREADS";

/// Exit status for invalid arguments or configuration.
pub const EXIT_CONFIG: u8 = 1;
/// Exit status when a trajectory diverges.
pub const EXIT_DIVERGED: u8 = 2;
/// Exit status when no certificate can be constructed.
pub const EXIT_NO_CERTIFICATE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Qr,
    Svd,
}

/// Where a trajectory starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Equilibrium(EquilibriumLabel),
    Point(StateVec),
}

impl FromStr for Start {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s0" => Ok(Start::Equilibrium(EquilibriumLabel::S0)),
            "s1" => Ok(Start::Equilibrium(EquilibriumLabel::S1)),
            "s2" => Ok(Start::Equilibrium(EquilibriumLabel::S2)),
            _ => s.parse::<StateVec>().map(Start::Point).map_err(|e| e.to_string()),
        }
    }
}

impl Start {
    /// Resolves to a point; equilibria are shifted by
    /// [`EQUILIBRIUM_OFFSET`] in every coordinate.
    pub fn resolve(&self, p: &SystemParams) -> anyhow::Result<StateVec> {
        match *self {
            Start::Point(s) => Ok(s),
            Start::Equilibrium(label) => {
                let Some(e) = equilibria(p).get(label) else {
                    return Err(Error::InvalidConfig(format!("{label} does not exist for r <= 1")).into());
                };
                Ok(e + StateVec::new(EQUILIBRIUM_OFFSET, EQUILIBRIUM_OFFSET, EQUILIBRIUM_OFFSET))
            }
        }
    }
}

fn parse_params(s: &str) -> Result<SystemParams, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match parse_real(s) {
        Ok(v) if v > 0.0 => Ok(v),
        Ok(v) => Err(format!("expected a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    match parse_real(s) {
        Ok(v) if v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("expected a non-negative number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_axis(s: &str) -> Result<AxisRange, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `param=value`, e.g. `r=28`.
fn parse_fixed(s: &str) -> Result<(Param, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected param=value, got `{s}`"))?;
    let param: Param = name.parse().map_err(|e: Error| e.to_string())?;
    Ok((param, parse_positive(value)?))
}

#[derive(Debug, Parser)]
#[command(name = "lyapdim", version, about = "Lyapunov exponents and dimension of the Lorenz system")]
pub struct Cli {
    /// Parameters as sigma,r,b; rationals such as 8/3 are accepted.
    #[arg(long, global = true, default_value = "10,28,8/3", value_parser = parse_params)]
    pub params: SystemParams,

    /// Integration step.
    #[arg(long, global = true, default_value = "1e-3", value_parser = parse_positive)]
    pub step: f64,

    #[arg(long, global = true, value_enum, default_value = "rk4")]
    pub method: MethodArg,

    /// Output format; reports default to text, tables to csv.
    #[arg(long, global = true, value_enum)]
    pub output: Option<Format>,

    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for quasi-random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for parallel work.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Dopri45,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Dopri45 => Method::Dopri45,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a trajectory and write t,x,y,z rows.
    Simulate {
        /// s0, s1, s2 (offset by 1e-3) or x,y,z.
        #[arg(long, default_value = "s0", allow_hyphen_values = true)]
        from: Start,
        #[arg(long, default_value = "100", value_parser = parse_positive)]
        horizon: f64,
        /// Leading time labelled `transient` in the output.
        #[arg(long, default_value = "0", value_parser = parse_nonnegative)]
        transient: f64,
        /// Time between written rows.
        #[arg(long, default_value = "0.01", value_parser = parse_positive)]
        every: f64,
    },
    /// Finite-time Lyapunov exponents.
    Les {
        #[arg(long, default_value = "s0", allow_hyphen_values = true)]
        from: Start,
        #[arg(long, default_value = "1000", value_parser = parse_positive)]
        horizon: f64,
        #[arg(long, default_value = "100", value_parser = parse_nonnegative)]
        transient: f64,
        #[arg(long, value_enum, default_value = "qr")]
        estimator: Estimator,
    },
    /// Local Lyapunov dimension, or the supremum over attractor samples.
    Dim {
        #[arg(long, default_value = "s0", allow_hyphen_values = true)]
        from: Start,
        #[arg(long, default_value = "1000", value_parser = parse_positive)]
        horizon: f64,
        #[arg(long, default_value = "100", value_parser = parse_nonnegative)]
        transient: f64,
        /// Number of attractor samples; with a value, the origin is added
        /// and the supremum over all seeds is reported.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Evaluate the theorem conditions.
    Check,
    /// Construct and verify the gamma certificate.
    Certify {
        #[arg(long, default_value_t = DEFAULT_R_SAMPLES)]
        samples: usize,
    },
    /// Classify a parameter grid.
    Scan {
        /// The parameter held fixed, e.g. r=28.
        #[arg(long, default_value = "r=28", value_parser = parse_fixed)]
        fixed: (Param, f64),
        /// First axis as param:min:max:cells.
        #[arg(long, default_value = "sigma:0:20:100", value_parser = parse_axis)]
        axis1: AxisRange,
        /// Second axis as param:min:max:cells.
        #[arg(long, default_value = "b:0:8:100", value_parser = parse_axis)]
        axis2: AxisRange,
    },
    /// Integrate quasi-random seeds from the absorbing ball and report
    /// exponents and equilibrium captures.
    Probe {
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value = "500", value_parser = parse_positive)]
        horizon: f64,
    },
    /// Equilibria, their Jacobian eigenvalues and the absorbing ball.
    Equilibria,
}

/// Maps an error to the documented exit status.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonFiniteState { .. }) => EXIT_DIVERGED,
        Some(Error::NoCertificate { .. }) => EXIT_NO_CERTIFICATE,
        _ => EXIT_CONFIG,
    }
}

struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    fn open(path: Option<&PathBuf>) -> anyhow::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { out })
    }

    fn json<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn text(&mut self, s: &str) -> anyhow::Result<()> {
        self.out.write_all(s.as_bytes())?;
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Writes a report as text or JSON; CSV is not meaningful for reports.
fn emit_report<T: Serialize>(sink: &mut Sink, format: Option<Format>, value: &T, text: String) -> anyhow::Result<()> {
    match format.unwrap_or(Format::Text) {
        Format::Text => sink.text(&text),
        Format::Json => sink.json(value),
        Format::Csv => bail!(Error::InvalidConfig("csv output is only available for simulate and scan".into())),
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let p = cli.params;
    let cfg = IntegratorConfig::new(cli.step, cli.method.into(), 1e-10, 1e-10)?;
    if cli.threads == 0 {
        bail!(Error::InvalidConfig("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("cannot start worker threads")?;
    // Validate everything before opening the output.
    let mut sink = None;
    let open = || -> anyhow::Result<Sink> { Sink::open(cli.out.as_ref()) };

    match &cli.command {
        Command::Simulate {
            from,
            horizon,
            transient,
            every,
        } => {
            let x0 = from.resolve(&p)?;
            let stride = cfg.steps_for(*every).max(1);
            let rows: Vec<TrajectoryRow> = trajectory(&p, &x0, transient + horizon, &cfg, stride)?
                .into_iter()
                .map(|(t, s)| TrajectoryRow {
                    t,
                    x: s.x,
                    y: s.y,
                    z: s.z,
                    segment: if t < *transient { Segment::Transient } else { Segment::Attractor },
                })
                .collect();
            if let Some(last) = rows.last() {
                let end = StateVec::new(last.x, last.y, last.z);
                let (label, d) = equilibria(&p).nearest(&end);
                eprintln!(
                    "end {end} at t = {}; nearest {label} at distance {d:.3e}; inside absorbing ball: {}",
                    last.t,
                    absorbing_ball(&p).contains(&end)
                );
            }
            let s = sink.insert(open()?);
            match cli.output.unwrap_or(Format::Csv) {
                Format::Json => s.json(&rows)?,
                _ => {
                    s.text("t,x,y,z,segment\n")?;
                    for r in &rows {
                        s.text(&format!("{},{},{},{},{}\n", r.t, r.x, r.y, r.z, r.segment))?;
                    }
                }
            }
        }
        Command::Les {
            from,
            horizon,
            transient,
            estimator,
        } => {
            let x0 = from.resolve(&p)?;
            let (spectrum, name) = match estimator {
                Estimator::Qr => (le_spectrum_qr(&p, &x0, *horizon, *transient, &cfg)?, "qr"),
                Estimator::Svd => {
                    let start = lyapdim::integrate::integrate(&p, &x0, *transient, &cfg)?;
                    (le_spectrum_svd(&p, &start, *horizon, &cfg)?, "svd")
                }
            };
            let rep = LesReport {
                params: p,
                start: x0,
                estimator: name.into(),
                dimension: kaplan_yorke(&spectrum),
                trace_residual: spectrum.trace_residual(&p),
                spectrum,
            };
            emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
        }
        Command::Dim {
            from,
            horizon,
            transient,
            samples,
        } => match samples {
            None => {
                let x0 = from.resolve(&p)?;
                let local = local_dimension(&p, &x0, *horizon, *transient, &cfg)?;
                let rep = DimReport {
                    params: p,
                    start: x0,
                    trace_residual: local.spectrum.trace_residual(&p),
                    local,
                };
                emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
            }
            Some(n) => {
                let x0 = from.resolve(&p)?;
                let mut seeds = vec![StateVec::ORIGIN];
                seeds.extend(attractor_samples(&p, &x0, *n, 7.3, *transient, &cfg)?);
                let grid = pool.install(|| set_dimension_grid(&p, &seeds, *horizon, *transient, &cfg))?;
                let rep = GridReport {
                    params: p,
                    seeds,
                    grid,
                    formula: dimension_formula(&p),
                };
                emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
            }
        },
        Command::Check => {
            let rep = CheckReport {
                params: p,
                verdict: check_conditions(&p),
                formula: dimension_formula(&p),
                s0: s0(&p),
                lemma2_domain: lemma2_domain_check(&p),
            };
            emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
        }
        Command::Certify { samples } => {
            let verdict = check_conditions(&p);
            let Some(certificate) = find_gamma_certificate(&p)? else {
                bail!(Error::InvalidParams(format!("theorem conditions do not hold: {verdict}")));
            };
            let rep = CertifyReport {
                params: p,
                verdict,
                checks: certificate.checks(&p),
                verification: verify_r_nonpositive(&p, &certificate, *samples),
                certificate,
            };
            emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
        }
        Command::Scan { fixed, axis1, axis2 } => {
            let req = ScanRequest {
                fixed: fixed.0,
                fixed_value: fixed.1,
                axis1: *axis1,
                axis2: *axis2,
            };
            let cells = pool.install(|| lyapdim::run_scan(&req))?;
            let s = sink.insert(open()?);
            match cli.output.unwrap_or(Format::Csv) {
                Format::Json => scan::write_json(&cells, &mut s.out)?,
                _ => scan::write_csv(&cells, &mut s.out)?,
            }
        }
        Command::Probe { samples, horizon } => {
            if *samples == 0 {
                bail!(Error::InvalidConfig("--samples must be at least 1".into()));
            }
            let rep = pool.install(|| lyapdim::chaos_probe(&p, *samples, *horizon, &cfg, cli.seed))?;
            let mut text = format!("params      {p}\n");
            for s in &rep.seeds {
                text.push_str(&format!(
                    "{}  LE1 {}  captured {}\n",
                    s.start,
                    s.largest_le.map_or("diverged".into(), |v| format!("{v:.4}")),
                    s.captured_by.map_or("-".into(), |l| l.to_string())
                ));
            }
            emit_report(sink.insert(open()?), cli.output, &rep, text)?;
        }
        Command::Equilibria => {
            let list = equilibria(&p)
                .iter()
                .map(|(label, state)| {
                    let mut eig: Vec<(f64, f64)> =
                        jacobian(&p, &state).complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
                    eig.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
                    EquilibriumInfo {
                        label,
                        state,
                        eigenvalues: eig,
                    }
                })
                .collect();
            let rep = EquilibriaReport {
                params: p,
                equilibria: list,
                absorbing_ball: absorbing_ball(&p),
            };
            emit_report(sink.insert(open()?), cli.output, &rep, rep.to_text())?;
        }
    }
    match sink {
        Some(s) => s.finish(),
        None => Ok(()),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_parsing() {
        assert_eq!("S1".parse::<Start>().unwrap(), Start::Equilibrium(EquilibriumLabel::S1));
        assert_eq!("1,2,3".parse::<Start>().unwrap(), Start::Point(StateVec::new(1.0, 2.0, 3.0)));
        assert!("s3".parse::<Start>().is_err());
    }

    #[test]
    fn equilibrium_start_is_offset() {
        let p = SystemParams::classical();
        let s = Start::Equilibrium(EquilibriumLabel::S0).resolve(&p).unwrap();
        assert_eq!(s, StateVec::new(1e-3, 1e-3, 1e-3));
        let sub = SystemParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
        assert!(Start::Equilibrium(EquilibriumLabel::S2).resolve(&sub).is_err());
    }

    #[test]
    fn fixed_parsing() {
        assert_eq!(parse_fixed("r=28").unwrap(), (Param::R, 28.0));
        assert!(parse_fixed("r28").is_err());
        assert!(parse_fixed("r=-1").is_err());
    }

    #[test]
    fn exit_code_mapping() {
        let diverged = anyhow::Error::from(Error::NonFiniteState {
            time: 1.0,
            x: f64::NAN,
            y: 0.0,
            z: 0.0,
        });
        assert_eq!(exit_code(&diverged), EXIT_DIVERGED);
        let none = anyhow::Error::from(Error::NoCertificate {
            parameter: "gamma3",
            lower: 1.0,
            upper: 0.0,
        });
        assert_eq!(exit_code(&none), EXIT_NO_CERTIFICATE);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_CONFIG);
    }
}
