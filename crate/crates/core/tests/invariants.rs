//! Cross-module property suites: roundtrips, mirror symmetry, spectral
//! invariants that tie the modulus, staircase, phase, and spectrum layers
//! together.

use apnorm_core::cantor::build_levels;
use apnorm_core::phases::{cantor_primitive, nested_phase, pl_phase};
use apnorm_core::spectrum::{ap_norm, coeffs_affine_exact};
use apnorm_core::{lip_estimate, Modulus};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chi_roundtrip_any_power(alpha in 0.15_f64..1.0, expo in -30.0_f64..0.0) {
        let m = Modulus::power(alpha).unwrap();
        let u = TAU * expo.exp();
        let d = m.chi_inv(u).unwrap();
        let back = m.chi(d).unwrap();
        prop_assert!((back - u).abs() <= 1e-10 * u);
    }

    #[test]
    fn staircase_mirror_pairs_exact(alpha in 0.3_f64..0.95, frac in 0.0_f64..1.0) {
        let m = Modulus::power(alpha).unwrap();
        let cl = build_levels(&m, 7).unwrap();
        // t in [π, 2π]: 2π - t is an exact float, covering every mirror pair
        let t = PI + frac * PI;
        prop_assert_eq!(cl.staircase(t) + cl.staircase(TAU - t), 1.0);
    }

    #[test]
    fn staircase_wave_bounded_and_odd(frac in 0.0_f64..1.0) {
        let m = Modulus::power(0.5).unwrap();
        let cl = build_levels(&m, 8).unwrap();
        let t = PI + frac * PI;
        let v = cl.staircase_wave(t);
        prop_assert!(v.abs() <= 1.0);
        prop_assert!((v + cl.staircase_wave(TAU - t)).abs() < 1e-12);
    }

    #[test]
    fn tent_norm_interval_ordering(lambda in 4.0_f64..200.0) {
        let tent = pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.0]).unwrap();
        let band = (lambda.powf(1.5).ceil() as i64).max(64);
        let spec = coeffs_affine_exact(&tent, lambda, band).unwrap();
        let n1 = ap_norm(&spec, 1.0).unwrap();
        let n15 = ap_norm(&spec, 1.5).unwrap();
        prop_assert!(n1.lo <= n1.hi && n15.lo <= n15.hi);
        // ℓ^p monotonicity up to interval slack
        prop_assert!(n15.lo <= n1.hi + 1e-9);
        // the A₂ value 1 sits below every wider-exponent interval top
        prop_assert!(n15.hi >= 1.0 - 1e-9);
    }
}

#[test]
fn lip_certificate_stable_under_refinement() {
    let m = Modulus::power(0.5).unwrap();
    for build in [
        cantor_primitive(&m, 7).unwrap(),
        cantor_primitive(&m, 9).unwrap(),
    ] {
        let c = lip_estimate(&build, &m).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }
    let (nested7, _) = nested_phase(&m, 3, 7).unwrap();
    let (nested9, _) = nested_phase(&m, 3, 9).unwrap();
    let c7 = lip_estimate(&nested7, &m).unwrap();
    let c9 = lip_estimate(&nested9, &m).unwrap();
    assert!(
        (c9 - c7).abs() <= 0.10 * c7.max(c9),
        "nested lip certificate drifted: {c7} vs {c9}"
    );
}

#[test]
fn nested_monotone_piece_budget() {
    let m = Modulus::power(0.5).unwrap();
    for levels in 1..=5u32 {
        let (phi, sched) = nested_phase(&m, levels, 9).unwrap();
        assert_eq!(sched.levels, levels);
        assert!(
            phi.monotone_pieces() <= (4 * levels + 3) as usize,
            "M = {levels}: {} pieces",
            phi.monotone_pieces()
        );
    }
}

#[test]
fn cantor_wave_evaluator_properties() {
    let m = Modulus::power(0.5).unwrap();
    let cl = build_levels(&m, 10).unwrap();
    // endpoint zeros are exact
    assert_eq!(cl.staircase_wave(0.0), 0.0);
    assert_eq!(cl.staircase_wave(TAU), 0.0);
    // the maximum 1 is attained on the σ = 1/4 gap
    let mut max_seen = 0.0_f64;
    for i in 0..=40000 {
        max_seen = max_seen.max(cl.staircase_wave(TAU * i as f64 / 40000.0).abs());
    }
    assert!(max_seen <= 1.0);
    let quarter_gap = cl.gaps(2).unwrap()[0];
    assert_eq!(
        cl.staircase_wave(0.5 * (quarter_gap.0 + quarter_gap.1)),
        1.0
    );
}
