//! Finite-time Lyapunov exponents and the Kaplan–Yorke (Lyapunov) dimension.
//!
//! Two estimators are provided. [`le_spectrum_qr`] is the usual
//! reorthonormalisation scheme: the tangent frame is re-orthonormalised every
//! [`REORTH_INTERVAL`] time units and the logarithms of the Gram–Schmidt
//! norms are averaged. [`le_spectrum_svd`] instead tracks the singular values
//! of the fundamental matrix itself, keeping the accumulated triangular
//! factor in a row-scaled form so the smallest singular value does not
//! underflow.

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, step_augmented, IntegratorConfig, TangentFrame};
use crate::linalg::{gram_schmidt, GradedRows};
use crate::model::{StateVec, SystemParams};

/// Time between reorthonormalisations of the tangent frame.
pub const REORTH_INTERVAL: f64 = 0.5;
/// Fewer intervals than this and [`le_spectrum_qr`] refuses to run.
pub const MIN_INTERVALS: usize = 100;
/// Spacing of the checkpoints used as the finite-horizon proxy of `limsup`.
pub const CHECKPOINT_INTERVAL: f64 = 10.0;
pub const DEFAULT_TRANSIENT: f64 = 100.0;
/// Longest horizon accepted by [`le_spectrum_svd`].
pub const SVD_HORIZON_LIMIT: f64 = 50.0;
/// Denominators smaller than this are treated as zero by [`kaplan_yorke`].
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Finite-time exponents, sorted non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeSpectrum {
    pub exponents: [f64; 3],
    pub horizon: f64,
    pub transient_discarded: f64,
}

impl LeSpectrum {
    pub fn new(mut exponents: [f64; 3], horizon: f64, transient_discarded: f64) -> Self {
        exponents.sort_by(|a, b| b.total_cmp(a));
        Self {
            exponents,
            horizon,
            transient_discarded,
        }
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// `sum + (sigma + 1 + b)`; zero for exact exponents.
    pub fn trace_residual(&self, p: &SystemParams) -> f64 {
        self.sum() - p.divergence()
    }

    pub fn largest(&self) -> f64 {
        self.exponents[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteTimeDim {
    pub j: usize,
    pub fraction: f64,
    pub value: f64,
    /// Set when the denominator `|LE_{j+1}|` vanished and `j + 1` was
    /// returned instead of dividing.
    pub degenerate: bool,
}

impl FiniteTimeDim {
    fn integer(j: usize) -> Self {
        Self {
            j,
            fraction: 0.0,
            value: j as f64,
            degenerate: false,
        }
    }
}

/// Kaplan–Yorke dimension of a sorted spectrum.
///
/// `0` when the top exponent is non-positive, `3` when the full sum is
/// non-negative, otherwise `j + (LE_1 + .. + LE_j) / |LE_{j+1}|` for the
/// largest `j` whose partial sum is positive with ratio below one. When no
/// `j` meets both conditions (a partial sum exactly cancels) the classical
/// rule "largest `j` with non-negative partial sum" is used; both rules give
/// the same value wherever they overlap.
pub fn kaplan_yorke(spectrum: &LeSpectrum) -> FiniteTimeDim {
    kaplan_yorke_exponents(&spectrum.exponents)
}

pub fn kaplan_yorke_exponents(exponents: &[f64; 3]) -> FiniteTimeDim {
    let le = exponents;
    if le[0] <= 0.0 {
        return FiniteTimeDim::integer(0);
    }
    if le.iter().sum::<f64>() >= 0.0 {
        return FiniteTimeDim::integer(3);
    }
    let partial = [le[0], le[0] + le[1]];
    let selected = (1..=2).rev().find(|&j| {
        let s = partial[j - 1];
        s > 0.0 && s < le[j].abs()
    });
    let j = selected.unwrap_or_else(|| {
        (1..=2)
            .rev()
            .find(|&j| partial[j - 1] >= 0.0)
            .expect("LE_1 > 0")
    });
    let denom = le[j].abs();
    if denom < DEGENERATE_DENOMINATOR {
        return FiniteTimeDim {
            j,
            fraction: 0.0,
            value: (j + 1) as f64,
            degenerate: true,
        };
    }
    let fraction = partial[j - 1] / denom;
    FiniteTimeDim {
        j,
        fraction,
        value: j as f64 + fraction,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time: f64,
    pub exponents: [f64; 3],
    pub dimension: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct QrRun {
    pub spectrum: LeSpectrum,
    pub checkpoints: Vec<Checkpoint>,
    pub final_state: StateVec,
}

fn validate_horizon(horizon: f64, transient: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidConfig(format!("horizon must be positive, got {horizon}")));
    }
    if !(transient.is_finite() && transient >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "transient must be non-negative, got {transient}"
        )));
    }
    Ok(())
}

/// The QR estimator with checkpoints. `observer` sees `(t, state)` after
/// every integration step, `t` measured from `x0`.
pub(crate) fn run_qr(
    p: &SystemParams,
    x0: &StateVec,
    horizon: f64,
    transient: f64,
    cfg: &IntegratorConfig,
    mut observer: impl FnMut(f64, &StateVec),
) -> Result<QrRun> {
    validate_horizon(horizon, transient)?;
    let per_interval = cfg.steps_for(REORTH_INTERVAL).max(1);
    let interval = per_interval as f64 * cfg.step();
    let intervals = (horizon / interval).round() as usize;
    if intervals < MIN_INTERVALS {
        return Err(Error::HorizonTooShort {
            horizon,
            intervals,
            required: MIN_INTERVALS,
        });
    }
    let transient_intervals = (transient / interval).round() as usize;
    let checkpoint_every = ((CHECKPOINT_INTERVAL / interval).round() as usize).max(1);

    let mut s = *x0;
    let mut frame = TangentFrame::identity();
    let mut sums = [0.0; 3];
    let mut checkpoints = Vec::with_capacity(intervals / checkpoint_every + 1);
    let mut step_index = 0usize;

    for k in 0..(transient_intervals + intervals) {
        for _ in 0..per_interval {
            step_index += 1;
            let t = step_index as f64 * cfg.step();
            (s, frame) = step_augmented(p, &s, &frame, cfg).map_err(|e| e.at_time(t))?;
            observer(t, &s);
        }
        let (q, r) = gram_schmidt(&frame.0);
        frame = TangentFrame(q);
        if k < transient_intervals {
            continue;
        }
        for i in 0..3 {
            sums[i] += r[(i, i)].ln();
        }
        let done = k + 1 - transient_intervals;
        if done % checkpoint_every == 0 || done == intervals {
            let elapsed = done as f64 * interval;
            let exps = LeSpectrum::new(sums.map(|v| v / elapsed), elapsed, 0.0).exponents;
            checkpoints.push(Checkpoint {
                time: elapsed,
                exponents: exps,
                dimension: kaplan_yorke_exponents(&exps).value,
            });
        }
    }

    let elapsed = intervals as f64 * interval;
    let spectrum = LeSpectrum::new(
        sums.map(|v| v / elapsed),
        elapsed,
        transient_intervals as f64 * interval,
    );
    Ok(QrRun {
        spectrum,
        checkpoints,
        final_state: s,
    })
}

/// Finite-time spectrum by repeated QR reorthonormalisation.
///
/// The frame is evolved (and reorthonormalised) through the transient as
/// well, but only the horizon contributes to the averages.
pub fn le_spectrum_qr(
    p: &SystemParams,
    x0: &StateVec,
    horizon: f64,
    transient: f64,
    cfg: &IntegratorConfig,
) -> Result<LeSpectrum> {
    run_qr(p, x0, horizon, transient, cfg, |_, _| {}).map(|r| r.spectrum)
}

/// Finite-time spectrum `(1/t) ln sigma_i(X(t))` from the singular values of
/// the fundamental matrix with `X(0) = I`.
pub fn le_spectrum_svd(
    p: &SystemParams,
    x0: &StateVec,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<LeSpectrum> {
    le_spectrum_svd_from(p, x0, horizon, cfg, &Matrix3::identity())
}

/// As [`le_spectrum_svd`] but for the fundamental matrix with
/// `X(0) = initial` (any nonsingular matrix).
pub fn le_spectrum_svd_from(
    p: &SystemParams,
    x0: &StateVec,
    horizon: f64,
    cfg: &IntegratorConfig,
    initial: &Matrix3<f64>,
) -> Result<LeSpectrum> {
    validate_horizon(horizon, 0.0)?;
    if horizon > SVD_HORIZON_LIMIT {
        return Err(Error::OverflowRisk {
            horizon,
            limit: SVD_HORIZON_LIMIT,
        });
    }
    if !initial.iter().all(|v| v.is_finite()) || initial.determinant() == 0.0 {
        return Err(Error::InvalidConfig("initial fundamental matrix must be nonsingular".into()));
    }
    let per_interval = cfg.steps_for(REORTH_INTERVAL).max(1);
    let total = cfg.steps_for(horizon);
    if total == 0 {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} is shorter than one step"
        )));
    }

    // X(t) = Q(t) P(t) with P accumulated in scaled form.
    let (q0, r0) = gram_schmidt(initial);
    let mut frame = TangentFrame(q0);
    let mut product = GradedRows::from_matrix(&r0);
    let mut s = *x0;
    for k in 1..=total {
        let t = k as f64 * cfg.step();
        (s, frame) = step_augmented(p, &s, &frame, cfg).map_err(|e| e.at_time(t))?;
        if k % per_interval == 0 || k == total {
            let (q, r) = gram_schmidt(&frame.0);
            frame = TangentFrame(q);
            product.left_multiply(&r);
        }
    }
    let elapsed = total as f64 * cfg.step();
    let logs = product.log_singular_values();
    Ok(LeSpectrum::new(logs.map(|v| v / elapsed), elapsed, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDimension {
    /// Dimension of the spectrum at the full horizon.
    pub final_dim: FiniteTimeDim,
    /// Maximum over the checkpoints (the last one is the final value).
    pub limsup: f64,
    pub spectrum: LeSpectrum,
    pub checkpoints: Vec<Checkpoint>,
}

/// Local Lyapunov dimension along the trajectory from `x0`.
pub fn local_dimension(
    p: &SystemParams,
    x0: &StateVec,
    horizon: f64,
    transient: f64,
    cfg: &IntegratorConfig,
) -> Result<LocalDimension> {
    let run = run_qr(p, x0, horizon, transient, cfg, |_, _| {})?;
    let final_dim = kaplan_yorke(&run.spectrum);
    let limsup = run
        .checkpoints
        .iter()
        .map(|c| c.dimension)
        .fold(final_dim.value, f64::max);
    Ok(LocalDimension {
        final_dim,
        limsup,
        spectrum: run.spectrum,
        checkpoints: run.checkpoints,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDimension {
    pub value: f64,
    pub argmax_seed: StateVec,
    pub argmax_index: usize,
    /// `limsup` per seed; `None` for seeds that diverged.
    pub per_seed: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// Supremum of the local dimension over `seeds`.
///
/// Seeds are processed in parallel; ties resolve to the lowest index so the
/// result does not depend on scheduling.
pub fn set_dimension_grid(
    p: &SystemParams,
    seeds: &[StateVec],
    horizon: f64,
    transient: f64,
    cfg: &IntegratorConfig,
) -> Result<GridDimension> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let results: Vec<Result<LocalDimension>> = seeds
        .par_iter()
        .map(|s| local_dimension(p, s, horizon, transient, cfg))
        .collect();
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut skipped = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut first_error = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(ld) => {
                per_seed.push(Some(ld.limsup));
                if best.map_or(true, |(_, v)| ld.limsup > v) {
                    best = Some((i, ld.limsup));
                }
            }
            Err(e @ Error::NonFiniteState { .. }) => {
                per_seed.push(None);
                skipped.push(i);
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    let (argmax_index, value) = match best {
        Some(b) => b,
        None => return Err(first_error.unwrap_or(Error::EmptySeeds)),
    };
    Ok(GridDimension {
        value,
        argmax_seed: seeds[argmax_index],
        argmax_index,
        per_seed,
        skipped,
    })
}

/// Points along one long trajectory, `spacing` time units apart, after a
/// `transient`.
pub fn attractor_samples(
    p: &SystemParams,
    start: &StateVec,
    count: usize,
    spacing: f64,
    transient: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<StateVec>> {
    let mut s = integrate(p, start, transient, cfg)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        s = integrate(p, &s, spacing, cfg)?;
        out.push(s);
    }
    Ok(out)
}
