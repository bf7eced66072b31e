//! Shared fixtures for the benchmarks.

use lyapdim::{integrate::integrate, IntegratorConfig, StateVec, SystemParams};

/// A point on the classical attractor, reached from near the origin.
pub fn attractor_point() -> StateVec {
    let p = SystemParams::classical();
    integrate(&p, &StateVec::new(1e-3, 1e-3, 1e-3), 50.0, &IntegratorConfig::default())
        .expect("classical trajectory stays bounded")
}
