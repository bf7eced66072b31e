use lyapdim::lyap::{attractor_samples, kaplan_yorke_exponents, le_spectrum_svd_from, DEFAULT_TRANSIENT};
use lyapdim::scan::chaos_probe;
use lyapdim::{
    le_spectrum_qr, le_spectrum_svd, dimension_formula, local_dimension, origin_eigenvalues, set_dimension_grid,
    IntegratorConfig, StateVec, SystemParams,
};
use nalgebra::Matrix3;

fn near_origin() -> StateVec {
    StateVec::new(1e-3, 1e-3, 1e-3)
}

fn on_attractor() -> StateVec {
    attractor_samples(
        &SystemParams::classical(),
        &near_origin(),
        1,
        0.0,
        DEFAULT_TRANSIENT,
        &IntegratorConfig::default(),
    )
    .unwrap()[0]
}

#[test]
fn classical_spectrum() {
    let p = SystemParams::classical();
    let s = le_spectrum_qr(&p, &near_origin(), 1000.0, 100.0, &IntegratorConfig::default()).unwrap();
    let expected = [0.906, 0.0, -14.572];
    for (got, want) in s.exponents.iter().zip(expected) {
        assert!((got - want).abs() < 0.02, "{:?}", s.exponents);
    }
    assert!((s.sum() + 41.0 / 3.0).abs() < 1e-3);
    assert_eq!(s.horizon, 1000.0);
    assert_eq!(s.transient_discarded, 100.0);
}

#[test]
fn stable_origin_spectrum_matches_eigenvalues() {
    let p = SystemParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
    let s = le_spectrum_qr(&p, &StateVec::new(1.0, 1.0, 1.0), 1000.0, 100.0, &IntegratorConfig::default()).unwrap();
    let e = origin_eigenvalues(&p).sorted();
    for k in 0..3 {
        assert!(s.exponents[k] < 0.0);
        assert!((s.exponents[k] - e[k]).abs() < 1e-3, "{:?} vs {e:?}", s.exponents);
    }
}

#[test]
fn local_dimension_examples() {
    let cfg = IntegratorConfig::default();
    let p = SystemParams::classical();
    let at_origin = local_dimension(&p, &StateVec::ORIGIN, 1000.0, 100.0, &cfg).unwrap();
    assert!((at_origin.final_dim.value - 2.40131).abs() < 1e-5);
    assert!((at_origin.final_dim.value - dimension_formula(&p)).abs() < 1e-6);

    let chaotic = local_dimension(&p, &near_origin(), 1000.0, 100.0, &cfg).unwrap();
    assert!((chaotic.final_dim.value - 2.062).abs() < 0.01, "{}", chaotic.final_dim.value);
    assert!(chaotic.limsup >= chaotic.final_dim.value);
    assert_eq!(chaotic.checkpoints.len(), 100);

    let stable = SystemParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
    let d = local_dimension(&stable, &StateVec::new(1.0, 1.0, 1.0), 200.0, 100.0, &cfg).unwrap();
    assert_eq!(d.final_dim.value, 0.0);
    assert_eq!(d.limsup, 0.0);
}

#[test]
fn qr_and_svd_agree_at_matched_horizon() {
    let p = SystemParams::classical();
    let cfg = IntegratorConfig::default();
    let x0 = on_attractor();
    let qr = le_spectrum_qr(&p, &x0, 50.0, 0.0, &cfg).unwrap();
    let svd = le_spectrum_svd(&p, &x0, 50.0, &cfg).unwrap();
    for k in 0..3 {
        assert!((qr.exponents[k] - svd.exponents[k]).abs() < 0.05, "{:?} vs {:?}", qr.exponents, svd.exponents);
    }
}

#[test]
fn initial_frame_changes_exponents_only_through_its_conditioning() {
    let p = SystemParams::classical();
    let cfg = IntegratorConfig::default();
    let x0 = on_attractor();
    let horizon = 20.0;
    let base = le_spectrum_svd(&p, &x0, horizon, &cfg).unwrap();

    // Orthogonal change of fundamental matrix: singular values unchanged.
    let (c, s) = (0.6f64, 0.8f64);
    let rot = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    let rotated = le_spectrum_svd_from(&p, &x0, horizon, &cfg, &rot).unwrap();
    for k in 0..3 {
        assert!((rotated.exponents[k] - base.exponents[k]).abs() < 1e-6);
    }

    // General C: sigma_min(C) <= sigma_i(XC) / sigma_i(X) <= sigma_max(C), so
    // the exponents differ by at most max |ln sigma(C)| / t.
    let m: Matrix3<f64> = Matrix3::new(2.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, -1.0, 1.5);
    let sv = m.singular_values();
    let log_spread: f64 = sv.max().ln().abs().max(sv.min().ln().abs());
    for horizon in [5.0, 20.0, 50.0] {
        let b = le_spectrum_svd(&p, &x0, horizon, &cfg).unwrap();
        let g = le_spectrum_svd_from(&p, &x0, horizon, &cfg, &m).unwrap();
        for k in 0..3 {
            assert!((g.exponents[k] - b.exponents[k]).abs() <= log_spread / horizon + 1e-9);
        }
    }
}

#[test]
fn grid_supremum_is_monotone_and_bounded() {
    let p = SystemParams::classical();
    let cfg = IntegratorConfig::rk4(2e-3).unwrap();
    let seeds = attractor_samples(&p, &near_origin(), 6, 3.1, DEFAULT_TRANSIENT, &cfg).unwrap();
    let small = set_dimension_grid(&p, &seeds[..3], 200.0, 50.0, &cfg).unwrap();
    let large = set_dimension_grid(&p, &seeds, 200.0, 50.0, &cfg).unwrap();
    assert!(large.value >= small.value);
    let bound = dimension_formula(&p);
    for v in large.per_seed.iter().flatten() {
        assert!(*v <= bound + 0.02);
    }
    let with_origin = set_dimension_grid(&p, &[seeds[0], StateVec::ORIGIN], 200.0, 50.0, &cfg).unwrap();
    assert_eq!(with_origin.argmax_index, 1);
}

#[test]
fn ordering_and_clamps_on_computed_spectra() {
    let p = SystemParams::classical();
    let s = le_spectrum_qr(&p, &near_origin(), 100.0, 0.0, &IntegratorConfig::default()).unwrap();
    assert!(s.exponents[0] >= s.exponents[1] && s.exponents[1] >= s.exponents[2]);
    let d = kaplan_yorke_exponents(&s.exponents);
    assert!(d.value > 2.0 && d.value < 3.0);
}

#[test]
fn classical_probe_is_chaotic() {
    let p = SystemParams::classical();
    let rep = chaos_probe(&p, 10, 500.0, &IntegratorConfig::default(), 3).unwrap();
    assert_eq!(rep.captured(), 0);
    let chaotic = rep.seeds.iter().filter(|s| (s.largest_le.unwrap() - 0.9).abs() < 0.1).count();
    assert!(chaotic >= 8, "{:?}", rep.seeds.iter().map(|s| s.largest_le).collect::<Vec<_>>());
}
