//! Lower-bound witness machinery and theoretical growth envelopes.
//!
//! For a phase with ω(φ', δ) ≤ c·ω(δ) and the window half-width δ_λ defined
//! by χ(2δ_λ) = 1/(2cλ), every admissible integer k (with mλ < k < Mλ for
//! the derivative range (m, M)) admits an interval I of length 2δ_λ around a
//! stationary point φ' = k/λ on which the triangle-windowed coefficient
//! satisfies |(Δ_I e^{iλφ})^(k)| ≥ δ_λ/(4π). `witness` verifies this
//! numerically with a certified quadrature margin.
//!
//! The envelopes are the pure comparison functions (no constants applied):
//! lower λ^{1/p}·χ⁻¹(1/λ), upper Θ and Θ_p, and the two-sided C² benchmark
//! λ^{1/p-1/2}.

use crate::error::{CoreError, Result};
use crate::modulus::Modulus;
use crate::phases::PhaseFn;
use crate::quad::{adaptive_gk_complex, linear_weight_osc_integral};
use crate::util::cis;
use num_complex::Complex64;
use std::collections::VecDeque;
use std::f64::consts::TAU;

/// Outcome of one stationary-window check.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub lambda: f64,
    pub k: i64,
    /// Stationary point with φ'(t) = k/λ (for step derivatives, the
    /// breakpoint where φ' crosses k/λ).
    pub t: f64,
    pub interval: (f64, f64),
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub quad_error: f64,
}

// Sliding-window oscillation over [0, span): largest max-min of the values
// reachable by a window of the given width. With `point_events` the entries
// are samples at isolated positions; otherwise entry i is a piece extending
// to the next entry's start (a window touches piece i anywhere inside it).
// Events must be sorted by position.
fn window_oscillation(events: &[(f64, f64)], span: f64, width: f64, point_events: bool) -> f64 {
    // extend cyclically by one window width
    let mut ext: Vec<(f64, f64)> = events.to_vec();
    for &(x, v) in events {
        if x <= width {
            ext.push((x + span, v));
        } else {
            break;
        }
    }
    let n = ext.len();
    let mut max_deque: VecDeque<usize> = VecDeque::new();
    let mut min_deque: VecDeque<usize> = VecDeque::new();
    let mut lo = 0usize;
    let mut worst = 0.0_f64;
    for r in 0..n {
        while let Some(&b) = max_deque.back() {
            if ext[b].1 <= ext[r].1 {
                max_deque.pop_back();
            } else {
                break;
            }
        }
        max_deque.push_back(r);
        while let Some(&b) = min_deque.back() {
            if ext[b].1 >= ext[r].1 {
                min_deque.pop_back();
            } else {
                break;
            }
        }
        min_deque.push_back(r);
        // a window of `width` can touch entries lo..=r iff it reaches from
        // inside entry lo (its position, for samples; anywhere before its
        // end, for pieces) to the start of entry r
        while lo < r
            && if point_events {
                ext[r].0 - ext[lo].0 > width
            } else {
                ext[r].0 - ext[lo + 1].0 >= width
            }
        {
            if max_deque.front() == Some(&lo) {
                max_deque.pop_front();
            }
            if min_deque.front() == Some(&lo) {
                min_deque.pop_front();
            }
            lo += 1;
        }
        let hi = ext[*max_deque.front().unwrap()].1;
        let lo_v = ext[*min_deque.front().unwrap()].1;
        if hi - lo_v > worst {
            worst = hi - lo_v;
        }
    }
    worst
}

fn deriv_events(phi: &PhaseFn) -> (Vec<(f64, f64)>, bool) {
    let w = phi.winding() as f64;
    if let Some(pieces) = phi.pieces() {
        (pieces.iter().map(|p| (p.x0, w + p.slope)).collect(), false)
    } else {
        let n = 1usize << 14;
        let samples = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                (t, phi.deriv(t))
            })
            .collect();
        (samples, true)
    }
}

/// Estimated Lipschitz-against-ω constant: 1.25 × the largest observed
/// oscillation ratio ω(φ', ρ_j)/ω(ρ_j) over the dyadic probe scales.
/// Deterministic given the probe grid; returns 0 for linear phases.
pub fn lip_estimate(phi: &PhaseFn, m: &Modulus) -> Result<f64> {
    let (events, point_events) = deriv_events(phi);
    let resolution = match phi.min_piece_len() {
        Some(l) => l,
        None => 8.0 * TAU / (1 << 14) as f64,
    };
    let mut worst = 0.0_f64;
    for j in 1..=40u32 {
        let delta = m.rho(j)?;
        if delta < resolution {
            break;
        }
        let osc = window_oscillation(&events, TAU, delta, point_events);
        let ratio = osc / m.omega(delta)?;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(1.25 * worst)
}

/// Window half-width δ_λ from χ(2δ_λ) = 1/(2cλ). Errors when λ is too small
/// for the argument to lie in the range of χ.
pub fn delta_lambda(m: &Modulus, c: f64, lambda: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(CoreError::Precondition(format!(
            "Lipschitz constant must be positive, got {c}"
        )));
    }
    if !(lambda >= 1.0) {
        return Err(CoreError::Precondition(format!("need λ ≥ 1, got {lambda}")));
    }
    let u = 1.0 / (2.0 * c * lambda);
    let top = m.chi(TAU)?;
    if u > top {
        return Err(CoreError::Precondition(format!(
            "λ = {lambda} too small: 1/(2cλ) = {u:.3e} exceeds χ(2π) = {top:.3e}"
        )));
    }
    let delta = 0.5 * m.chi_inv(u)?;
    // consequence of the definition: δ_λ ≥ χ⁻¹(1/λ)/(4(c+1))
    let floor = m.chi_inv(1.0 / lambda)? / (4.0 * (c + 1.0));
    if delta < floor * (1.0 - 1e-9) {
        return Err(CoreError::Numeric(format!(
            "δ_λ = {delta:.6e} fell below its guaranteed floor {floor:.6e}"
        )));
    }
    Ok(delta)
}

/// Certified range (min φ', max φ') from piece slopes, or from a dense
/// 2^14-point grid for the smooth kinds (where the extrema are analytic).
pub fn derivative_range(phi: &PhaseFn) -> (f64, f64) {
    let w = phi.winding() as f64;
    if let Some(pieces) = phi.pieces() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in pieces {
            lo = lo.min(w + p.slope);
            hi = hi.max(w + p.slope);
        }
        (lo, hi)
    } else {
        let s = phi.cos_scale().unwrap_or(0.0).abs();
        (w - s, w + s)
    }
}

/// 16-or-fewer equispaced integers strictly inside (mλ, Mλ).
pub fn admissible_k(range: (f64, f64), lambda: f64, count: usize) -> Vec<i64> {
    let lo_f = range.0 * lambda;
    let hi_f = range.1 * lambda;
    let mut k_min = lo_f.floor() as i64 + 1;
    while (k_min as f64) <= lo_f {
        k_min += 1;
    }
    let mut k_max = hi_f.ceil() as i64 - 1;
    while (k_max as f64) >= hi_f {
        k_max -= 1;
    }
    if k_max < k_min || count == 0 {
        return Vec::new();
    }
    let total = (k_max - k_min) as usize + 1;
    if total <= count {
        return (k_min..=k_max).collect();
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let k = k_min + ((k_max - k_min) as f64 * i as f64 / (count - 1) as f64).round() as i64;
        if out.last() != Some(&k) {
            out.push(k);
        }
    }
    out
}

fn find_stationary_point(phi: &PhaseFn, target: f64) -> Result<f64> {
    if let Some(pieces) = phi.pieces() {
        let w = phi.winding() as f64;
        let n = pieces.len();
        for j in 0..n {
            let s = w + pieces[j].slope;
            if s == target {
                return Ok(0.5 * (pieces[j].x0 + pieces[j].x1));
            }
            let s_next = w + pieces[(j + 1) % n].slope;
            if (s - target) * (s_next - target) < 0.0 {
                // φ' steps across the target value at this breakpoint
                return Ok(pieces[j].x1.min(TAU));
            }
        }
        Err(CoreError::Numeric(format!(
            "no crossing of φ' = {target} found (range should contain it)"
        )))
    } else {
        let n = 1usize << 14;
        let f = |t: f64| phi.deriv(t) - target;
        let mut prev_t = 0.0;
        let mut prev_v = f(0.0);
        for i in 1..=n {
            let t = TAU * i as f64 / n as f64;
            let v = f(t);
            if prev_v == 0.0 {
                return Ok(prev_t);
            }
            if prev_v * v < 0.0 {
                let (mut a, mut b) = (prev_t, t);
                let mut fa = prev_v;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let fm = f(mid);
                    if fa * fm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            prev_t = t;
            prev_v = v;
        }
        Err(CoreError::Numeric(format!(
            "no crossing of φ' = {target} found on the probe grid"
        )))
    }
}

// (1/2π)·∫_I Δ_I(t)·e^{i(λφ(t)-kt)} dt with a certified error bound.
fn windowed_coefficient(
    phi: &PhaseFn,
    lambda: f64,
    k: i64,
    interval: (f64, f64),
    abs_tol: f64,
) -> (f64, f64) {
    let (a, b) = interval;
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let kf = k as f64;
    if let Some(pieces) = phi.pieces() {
        let w = phi.winding() as f64;
        let mut total = Complex64::new(0.0, 0.0);
        let mut segments = 0usize;
        // integrate each half of the triangle over each overlapping piece
        for (seg_a, seg_b, alpha, beta) in [
            (a, c, 1.0 / half, -(a / half)),
            (c, b, -1.0 / half, b / half),
        ] {
            for p in pieces {
                let lo = p.x0.max(seg_a);
                let hi = p.x1.min(seg_b);
                if hi <= lo {
                    continue;
                }
                let mu = lambda * (p.slope + w) - kf;
                let c0 = lambda * (p.y0 - p.slope * p.x0);
                total += cis(c0) * linear_weight_osc_integral(alpha, beta, mu, lo, hi);
                segments += 1;
            }
        }
        (total.norm() / TAU, 1e-13 * (segments as f64 + 1.0) * half)
    } else {
        let tri = |t: f64| 1.0 - (t - c).abs() / half;
        let f = |t: f64| cis(lambda * phi.eval(t) - kf * t) * tri(t);
        let tol = abs_tol * TAU * 0.45;
        let (v1, e1) = adaptive_gk_complex(&f, a, c, tol);
        let (v2, e2) = adaptive_gk_complex(&f, c, b, tol);
        ((v1 + v2).norm() / TAU, (e1 + e2) / TAU)
    }
}

/// Checks the stationary-window lower bound for one (λ, k) pair.
///
/// Preconditions (each reported by name when it binds): 2δ_λ < 2π,
/// λ > 2/(M-m), and 1/(2cλ) within the range of χ.
pub fn witness(
    phi: &PhaseFn,
    m: &Modulus,
    lip_c: f64,
    lambda: f64,
    k: i64,
) -> Result<WitnessReport> {
    let (lo, hi) = derivative_range(phi);
    if !(lo < hi) {
        return Err(CoreError::Precondition(
            "no admissible k: the derivative range is a single point".into(),
        ));
    }
    let kf = k as f64;
    if !(lo * lambda < kf && kf < hi * lambda) {
        return Err(CoreError::Domain(format!(
            "k = {k} outside the open admissible range ({:.3}, {:.3})",
            lo * lambda,
            hi * lambda
        )));
    }
    if !(lambda > 2.0 / (hi - lo)) {
        return Err(CoreError::Precondition(format!(
            "λ = {lambda} below the spacing threshold 2/(M-m) = {:.3}",
            2.0 / (hi - lo)
        )));
    }
    let delta = delta_lambda(m, lip_c, lambda)?;
    if !(2.0 * delta < TAU) {
        return Err(CoreError::Precondition(format!(
            "window 2δ_λ = {:.3e} does not fit in the circle",
            2.0 * delta
        )));
    }
    let t = find_stationary_point(phi, kf / lambda)?;
    let interval = if t < delta {
        (0.0, 2.0 * delta)
    } else if t > TAU - delta {
        (TAU - 2.0 * delta, TAU)
    } else {
        (t - delta, t + delta)
    };
    let threshold = delta / (2.0 * TAU);
    let (measured, quad_error) = windowed_coefficient(phi, lambda, k, interval, 1e-3 * threshold);
    if quad_error > 1e-3 * threshold {
        return Err(CoreError::Numeric(format!(
            "quadrature error {quad_error:.3e} exceeds 1e-3·threshold"
        )));
    }
    Ok(WitnessReport {
        lambda,
        k,
        t,
        interval,
        measured,
        threshold,
        pass: measured >= threshold - quad_error,
        quad_error,
    })
}

/// Lower envelope λ^{1/p}·χ⁻¹(1/λ), no constant applied.
pub fn lower_env(m: &Modulus, p: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 1.0) {
        return Err(CoreError::Domain(format!("need λ ≥ 1, got {lambda}")));
    }
    Ok(lambda.powf(1.0 / p) * m.chi_inv(1.0 / lambda)?)
}

/// Upper envelope Θ(λ) for the A₁ norm of staircase-primitive phases.
pub fn upper_env_a(m: &Modulus, lambda: f64) -> Result<f64> {
    if !(lambda >= 2.0) {
        return Err(CoreError::Domain(format!("need λ ≥ 2, got {lambda}")));
    }
    m.theta(lambda)
}

/// Upper envelope Θ_p(λ) for the A_p norms, 1 < p < 2.
pub fn upper_env_ap(m: &Modulus, p: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 2.0) {
        return Err(CoreError::Domain(format!("need λ ≥ 2, got {lambda}")));
    }
    m.theta_p(p, lambda)
}

/// The two-sided C² benchmark envelope λ^{1/p - 1/2}.
pub fn c2_env(p: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(CoreError::Domain(format!("need λ > 0, got {lambda}")));
    }
    Ok(lambda.powf(1.0 / p - 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::{cantor_primitive, cos_phase, linear_phase, pl_phase};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn half() -> Modulus {
        Modulus::power(0.5).unwrap()
    }

    #[test]
    fn lip_estimate_linear_is_zero() {
        let c = lip_estimate(&linear_phase(4, 1.0), &half()).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn lip_estimate_cos_bracket() {
        // with ω(δ) = δ/2π, the ratio approaches 2π from below
        let m = Modulus::power(1.0).unwrap();
        let c = lip_estimate(&cos_phase(), &m).unwrap();
        assert!(c > 1.25 / TAU && c <= 1.25 * TAU, "c = {c}");
        assert!(c > 0.9 * 1.25 * TAU, "should approach the sup bound: {c}");
    }

    #[test]
    fn lip_estimate_cantor_stable_under_refinement() {
        let m = half();
        let c6 = lip_estimate(&cantor_primitive(&m, 6).unwrap(), &m).unwrap();
        let c7 = lip_estimate(&cantor_primitive(&m, 7).unwrap(), &m).unwrap();
        assert!(c6.is_finite() && c6 > 0.0);
        assert!((c7 - c6).abs() <= 0.1 * c6.max(c7), "c6={c6}, c7={c7}");
    }

    #[test]
    fn delta_lambda_linear_modulus_closed_form() {
        // ω = δ/2π: χ(δ) = δ²/2π, so χ(2δ)=1/(2cλ) gives δ = √(π/(4cλ))
        let m = Modulus::power(1.0).unwrap();
        for (c, lambda) in [(2.0, 100.0), (7.0, 1000.0)] {
            let d = delta_lambda(&m, c, lambda).unwrap();
            assert_relative_eq!(d, (PI / (4.0 * c * lambda)).sqrt(), max_relative = 1e-9);
        }
        let d1 = delta_lambda(&m, 2.0, 500.0).unwrap();
        let d2 = delta_lambda(&m, 2.0, 1000.0).unwrap();
        assert!(d2 < d1);
    }

    #[test]
    fn delta_lambda_consequence_holds() {
        let m = half();
        for lambda in [10.0, 100.0, 1000.0] {
            let c = 2.0;
            let d = delta_lambda(&m, c, lambda).unwrap();
            let floor = m.chi_inv(1.0 / lambda).unwrap() / (4.0 * (c + 1.0));
            assert!(d >= floor, "λ={lambda}: {d} < {floor}");
        }
    }

    #[test]
    fn derivative_ranges() {
        let (lo, hi) = derivative_range(&cos_phase());
        assert_eq!((lo, hi), (-1.0, 1.0));
        let tent = pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.0]).unwrap();
        let (lo, hi) = derivative_range(&tent);
        assert_relative_eq!(lo, -1.0 / PI);
        assert_relative_eq!(hi, 1.0 / PI);
        let (lo, hi) = derivative_range(&linear_phase(0, 3.0));
        assert_eq!((lo, hi), (0.0, 0.0));
    }

    #[test]
    fn admissible_k_selection() {
        let ks = admissible_k((-1.0, 1.0), 64.0, 16);
        assert_eq!(ks.len(), 16);
        assert!(ks.iter().all(|&k| -64 < k && k < 64));
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(admissible_k((0.0, 0.0), 64.0, 16).is_empty());
    }

    #[test]
    fn witness_cos_small_grid() {
        let phi = cos_phase();
        let m = Modulus::power(1.0).unwrap();
        let c = lip_estimate(&phi, &m).unwrap();
        let lambda = 256.0;
        for k in admissible_k(derivative_range(&phi), lambda, 5) {
            let r = witness(&phi, &m, c, lambda, k).unwrap();
            assert!(r.pass, "k={k}: measured {} < {}", r.measured, r.threshold);
            let half_width = 0.5 * (r.interval.1 - r.interval.0);
            assert_relative_eq!(r.threshold, half_width / (2.0 * TAU));
            assert!(r.interval.0 >= 0.0 && r.interval.1 <= TAU);
            assert!(r.t >= r.interval.0 && r.t <= r.interval.1);
        }
    }

    #[test]
    fn witness_exact_stationary_linear_case() {
        // a linear phase tangent at t: the windowed coefficient equals the
        // triangle's zero coefficient |I|/2/(2π) = δ/(2π), twice the threshold
        let phi = linear_phase(1, 0.0);
        let lambda = 300.0;
        let k = 300;
        let delta = 0.01;
        let (measured, err) = windowed_coefficient(&phi, lambda, k, (2.0, 2.0 + 2.0 * delta), 1e-9);
        assert_relative_eq!(measured, delta / TAU, max_relative = 1e-6);
        assert!(err < 1e-9);
    }

    #[test]
    fn witness_rejects_bad_inputs() {
        let phi = cos_phase();
        let m = Modulus::power(1.0).unwrap();
        let c = lip_estimate(&phi, &m).unwrap();
        // k outside the admissible range
        assert!(witness(&phi, &m, c, 256.0, 400).is_err());
        // λ below the spacing threshold (range width 2 ⇒ λ > 1 needed, and
        // the χ-range precondition binds earlier)
        assert!(witness(&phi, &m, c, 1.0, 0).is_err());
        // constant phase: no admissible k at all
        let flat = linear_phase(0, 1.0);
        assert!(matches!(
            witness(&flat, &m, c, 256.0, 1),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn envelope_shapes() {
        let m = half();
        // lower envelope at p = 1 grows like λ^{α/(1+α)} = λ^{1/3}
        let e1 = lower_env(&m, 1.0, 100.0).unwrap();
        let e2 = lower_env(&m, 1.0, 100.0 * 8.0).unwrap();
        assert_relative_eq!(e2 / e1, 2.0, max_relative = 1e-6); // 8^{1/3}
        assert_eq!(c2_env(2.0, 77.0).unwrap(), 1.0);
        // Θ/λ^{1/3} grows like (log λ)^{1/3} for α = 1/2
        let g = |y: f64| upper_env_a(&m, y).unwrap() / y.powf(1.0 / 3.0);
        let ratio = g(1e6) / g(1e3);
        assert_relative_eq!(
            ratio,
            (1e6_f64.ln() / 1e3_f64.ln()).powf(1.0 / 3.0),
            max_relative = 1e-6
        );
        assert!(upper_env_ap(&m, 1.2, 64.0).unwrap() > 0.0);
        assert!(upper_env_a(&m, 1.5).is_err());
    }
}
