//! Lyapunov exponents and Lyapunov dimension of the Lorenz system.
//!
//! * [`model`]: vector field, Jacobian, equilibria, absorbing ball.
//! * [`integrate`]: RK4 / Dormand–Prince steppers for the state and the
//!   variational equation.
//! * [`lyap`]: finite-time exponents (QR and SVD estimators), Kaplan–Yorke
//!   dimension, local and grid dimensions.
//! * [`theory`]: the exact dimension formula, its parameter conditions and
//!   the Lyapunov-function certificate that backs it.
//! * [`scan`]: parameter-plane classification and chaos probing.

pub mod error;
pub mod integrate;
pub mod linalg;
pub mod lyap;
pub mod model;
pub mod sampling;
pub mod scan;
pub mod theory;

pub use error::{Error, Result};
pub use integrate::{step_augmented, step_state, IntegratorConfig, Method, TangentFrame};
pub use lyap::{
    kaplan_yorke, le_spectrum_qr, le_spectrum_svd, local_dimension, set_dimension_grid, FiniteTimeDim,
    LeSpectrum, LocalDimension,
};
pub use model::{
    absorbing_ball, equilibria, jacobian, vector_field, AbsorbingBall, EquilibriumLabel, EquilibriumSet,
    StateVec, SystemParams,
};
pub use scan::{chaos_probe, run_scan, ScanCell, ScanRequest, Verdict};
pub use theory::{
    check_conditions, find_gamma_certificate, dimension_formula, origin_eigenvalues, symmetrized_eigenvalues,
    verify_r_nonpositive, Branch, ConditionId, GammaCertificate, Outcome, TheoremVerdict,
};
