use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    /// The state left the region `|s| <= 1e6` or became non-finite.
    #[error("state diverged at t = {time}: ({x}, {y}, {z})")]
    NonFiniteState { time: f64, x: f64, y: f64, z: f64 },

    #[error("horizon {horizon} covers only {intervals} reorthonormalization intervals (need at least {required})")]
    HorizonTooShort {
        horizon: f64,
        intervals: usize,
        required: usize,
    },

    #[error("horizon {horizon} exceeds the fundamental-matrix limit {limit}")]
    OverflowRisk { horizon: f64, limit: f64 },

    #[error("leading coefficient of the gamma quadratic vanishes (inequality feasible for all gamma > 0: {feasible})")]
    DegenerateQuadratic { feasible: bool },

    #[error("sigma*r + (sigma - b)(b - 1) = {value} is not positive; the scaling rho is undefined")]
    RhoUndefined { value: f64 },

    #[error("no certificate: bracket for {parameter} is empty (lower {lower}, upper {upper})")]
    NoCertificate {
        parameter: &'static str,
        lower: f64,
        upper: f64,
    },

    #[error("seed list is empty")]
    EmptySeeds,

    #[error("invalid scan request: {0}")]
    InvalidScan(String),

    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}
