//! Small numeric helpers shared across modules.

use std::f64::consts::TAU;

/// sin(2πv) with exact symmetry folding.
///
/// The argument is reduced to [0, 1) and folded into [0, 1/4] before the
/// libm call. The folds `1 - x` (for x ≥ 1/2) and `1/2 - x` (for x ≥ 1/4)
/// are exact in IEEE arithmetic (Sterbenz), so dyadic inputs hit exact
/// values: sin2pi(0) = sin2pi(1/2) = 0 and sin2pi(1/4) = -sin2pi(3/4) = 1.
pub fn sin2pi(v: f64) -> f64 {
    let mut x = v - v.floor();
    let mut sign = 1.0;
    if x >= 0.5 {
        sign = -1.0;
        x = 1.0 - x;
    }
    if x > 0.25 {
        x = 0.5 - x;
    }
    sign * (TAU * x).sin()
}

/// e^{iθ} as (cos θ, sin θ).
#[inline]
pub fn cis(theta: f64) -> num_complex::Complex64 {
    let (s, c) = theta.sin_cos();
    num_complex::Complex64::new(c, s)
}

/// Reduce t into [0, 2π).
pub fn reduce_mod_tau(t: f64) -> f64 {
    let mut x = t % TAU;
    if x < 0.0 {
        x += TAU;
    }
    x
}

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive. Values
/// within 1e-9 relative of an integer are snapped, so the usual power-of-two
/// grids land on exact integers (integer λ activates exact modulation
/// handling downstream).
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1 && lo > 0.0 && hi >= lo);
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..count)
        .map(|i| {
            let v = if i == count - 1 {
                hi
            } else {
                lo * (ratio * i as f64 / (count - 1) as f64).exp()
            };
            if (v.round() - v).abs() < 1e-9 * v.max(1.0) {
                v.round()
            } else {
                v
            }
        })
        .collect()
}
