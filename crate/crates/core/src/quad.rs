//! Quadrature kernels: adaptive Simpson, adaptive Gauss–Kronrod, and the
//! closed form for ∫ (αt+β)·e^{i(μt+c)} dt over an interval.

use num_complex::Complex64;

/// Adaptive Simpson with relative tolerance. Returns (value, error estimate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> (f64, f64) {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        abs_tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * abs_tol {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (lv, le) = recurse(f, a, m, fa, flm, fm, left, abs_tol * 0.5, depth - 1);
            let (rv, re) = recurse(f, m, b, fm, frm, fb, right, abs_tol * 0.5, depth - 1);
            (lv + rv, le + re)
        }
    }
    if a == b {
        return (0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max((b - a) * fm.abs()).max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth)
}

// Gauss–Kronrod 7-15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).norm();
    // standard QUADPACK-style sharpening of the 15-vs-7 difference
    (value, (200.0 * err).powf(1.5).min(err).max(err * 1e-6))
}

/// Adaptive Gauss–Kronrod for complex integrands to an absolute tolerance.
/// Returns (value, certified-style error estimate).
pub fn adaptive_gk_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> (Complex64, f64) {
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        abs_tol: f64,
        depth: u32,
    ) -> (Complex64, f64) {
        let (v, e) = gk15_complex(f, a, b);
        if e <= abs_tol || depth == 0 {
            (v, e)
        } else {
            let m = 0.5 * (a + b);
            let (lv, le) = recurse(f, a, m, abs_tol * 0.5, depth - 1);
            let (rv, re) = recurse(f, m, b, abs_tol * 0.5, depth - 1);
            (lv + rv, le + re)
        }
    }
    if a == b {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    recurse(f, a, b, abs_tol, 40)
}

/// ∫_a^b (α t + β) e^{iμt} dt in closed form, with a series fallback when
/// |μ(b-a)| is small enough for the antiderivative to cancel catastrophically.
pub fn linear_weight_osc_integral(alpha: f64, beta: f64, mu: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let theta = mu * len;
    if theta.abs() < 1e-4 {
        // expand around t = a: ∫ (α(a+s)+β) e^{iμ(a+s)} ds, s in [0, len]
        let w0 = alpha * a + beta;
        let i = Complex64::new(0.0, 1.0);
        // ∫ e^{iμs} ds = len Σ (iθ)^n/(n+1)!,  ∫ s e^{iμs} ds = len² Σ (iθ)^n (n+1)/(n+2)!
        let it = i * theta;
        let e0 = 1.0 + it / 2.0 + it * it / 6.0 + it * it * it / 24.0;
        let e1 = 0.5 + it / 3.0 + it * it / 8.0 + it * it * it / 30.0;
        return crate::util::cis(mu * a) * (w0 * len * e0 + alpha * len * len * e1);
    }
    let i = Complex64::new(0.0, 1.0);
    let inv = 1.0 / mu;
    let anti =
        |t: f64| crate::util::cis(mu * t) * (-i * inv * (alpha * t + beta) + alpha * inv * inv);
    anti(b) - anti(a)
}
