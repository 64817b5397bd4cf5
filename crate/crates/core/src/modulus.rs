//! Moduli of continuity and their derived scales.
//!
//! Every `Modulus` ω is normalized so that ω(2π) = 1. From ω we derive
//! χ(δ) = δ·ω(δ) together with its inverse, the level scales ρ_j solving
//! ω(ρ_j) = 2^{-j}, the activation scales a_j = 1/χ(ρ_j), and the envelope
//! functions Θ(y) = (y/log y)·χ⁻¹((log y)²/y) and
//! Θ_p(y) = (∫_1^y (χ⁻¹(1/τ))^p dτ)^{1/p}.
//!
//! Built-in kinds:
//! - `power(α)`:      ω(δ) = (δ/2π)^α, 0 < α ≤ 1
//! - `power_log(α,β)`: ω(δ) = (δ/2π)^α · (log(2πe/δ))^{-β}
//! - `tabulated`:     monotone nodes, piecewise-linear in log-log coordinates
//!
//! Construction validates monotonicity and the doubling property
//! ω(2δ) ≤ 2ω(δ) on a dyadic probe grid; non-doubling inputs are rejected.
//! The strict form 2ρ_{j+1} < ρ_j is re-checked wherever a level chain is
//! actually consumed (see the Cantor construction).

use crate::error::{CoreError, Result};
use crate::quad::adaptive_simpson;
use std::f64::consts::TAU;

#[derive(Debug, Clone)]
enum Kind {
    Power {
        alpha: f64,
    },
    PowerLog {
        alpha: f64,
        beta: f64,
    },
    /// Nodes as (ln δ, ln ω_raw), strictly increasing in both coordinates.
    Tabulated {
        nodes: Vec<(f64, f64)>,
    },
}

/// A normalized modulus of continuity.
#[derive(Debug, Clone)]
pub struct Modulus {
    kind: Kind,
    /// Factor applied to the raw kind so that ω(2π) = 1.
    rescale: f64,
}

impl Modulus {
    /// ω(δ) = (δ/2π)^α.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(CoreError::Domain(format!(
                "power modulus needs α in (0, 1], got {alpha}"
            )));
        }
        let m = Modulus {
            kind: Kind::Power { alpha },
            rescale: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// ω(δ) = (δ/2π)^α · (log(2πe/δ))^{-β}; already normalized at δ = 2π.
    ///
    /// The local log-log slope is α + β/log(2πe/δ), so the doubling and
    /// monotonicity checks admit roughly α + β ≤ 1 (for β ≥ 0) and |β| ≤ α
    /// (for β < 0, the slower-than-power family); anything else is rejected
    /// by the probe validation.
    pub fn power_log(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !beta.is_finite() {
            return Err(CoreError::Domain(format!(
                "power-log modulus needs α in (0, 1] and finite β, got α={alpha}, β={beta}"
            )));
        }
        let m = Modulus {
            kind: Kind::PowerLog { alpha, beta },
            rescale: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// Monotone tabulated modulus, interpolated piecewise-linearly in log-log
    /// coordinates and extended beyond the node range by the boundary slopes.
    /// Rescaled so that ω(2π) = 1.
    pub fn tabulated(nodes: &[(f64, f64)]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(CoreError::Domain(
                "tabulated modulus needs at least two nodes".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[0].0 > 0.0 && w[1].0 > w[0].0 && w[0].1 > 0.0 && w[1].1 > w[0].1) {
                return Err(CoreError::Domain(format!(
                    "tabulated nodes must be strictly increasing and positive, got {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        let log_nodes: Vec<(f64, f64)> = nodes.iter().map(|&(d, w)| (d.ln(), w.ln())).collect();
        let mut m = Modulus {
            kind: Kind::Tabulated { nodes: log_nodes },
            rescale: 1.0,
        };
        let raw_at_tau = m.omega_raw(TAU);
        m.rescale = 1.0 / raw_at_tau;
        m.validate()?;
        Ok(m)
    }

    /// The normalization factor applied at construction.
    pub fn rescale_factor(&self) -> f64 {
        self.rescale
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Power { .. } => "power",
            Kind::PowerLog { .. } => "power-log",
            Kind::Tabulated { .. } => "tabulated",
        }
    }

    fn omega_raw(&self, delta: f64) -> f64 {
        if delta == 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Power { alpha } => (delta / TAU).powf(*alpha),
            Kind::PowerLog { alpha, beta } => {
                let x = delta / TAU;
                // log(2πe/δ) = 1 - log(δ/2π)
                let l = 1.0 - x.ln();
                x.powf(*alpha) * l.powf(-beta)
            }
            Kind::Tabulated { nodes } => {
                let lx = delta.ln();
                let ly = if lx <= nodes[0].0 {
                    let (x0, y0) = nodes[0];
                    let (x1, y1) = nodes[1];
                    y0 + (lx - x0) * (y1 - y0) / (x1 - x0)
                } else if lx >= nodes[nodes.len() - 1].0 {
                    let (x0, y0) = nodes[nodes.len() - 2];
                    let (x1, y1) = nodes[nodes.len() - 1];
                    y1 + (lx - x1) * (y1 - y0) / (x1 - x0)
                } else {
                    let i = nodes.partition_point(|&(x, _)| x <= lx) - 1;
                    let (x0, y0) = nodes[i];
                    let (x1, y1) = nodes[i + 1];
                    y0 + (lx - x0) * (y1 - y0) / (x1 - x0)
                };
                ly.exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        // dyadic probe grid, four probes per octave down to 2π·2^{-60}
        let mut prev = self.omega(TAU)?;
        if (prev - 1.0).abs() > 1e-12 {
            return Err(CoreError::Construction(format!(
                "normalization failed: ω(2π) = {prev}"
            )));
        }
        for i in 1..=240 {
            let delta = TAU * (-(i as f64) / 4.0).exp2();
            let w = self.omega(delta)?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(CoreError::Construction(format!(
                    "ω({delta:.3e}) = {w} is not positive and finite"
                )));
            }
            if w > prev * (1.0 + 1e-12) {
                return Err(CoreError::Construction(format!(
                    "ω is not non-decreasing near δ = {delta:.3e}"
                )));
            }
            let w2 = self.omega((2.0 * delta).min(TAU))?;
            if w2 > 2.0 * w * (1.0 + 1e-12) {
                return Err(CoreError::Construction(format!(
                    "doubling ω(2δ) ≤ 2ω(δ) fails at δ = {delta:.3e}: {w2:.6e} > 2·{w:.6e}"
                )));
            }
            prev = w;
        }
        Ok(())
    }

    /// Normalized ω(δ).
    pub fn omega(&self, delta: f64) -> Result<f64> {
        if delta < 0.0 || delta.is_nan() {
            return Err(CoreError::Domain(format!("ω needs δ ≥ 0, got {delta}")));
        }
        Ok(self.rescale * self.omega_raw(delta))
    }

    /// χ(δ) = δ·ω(δ).
    pub fn chi(&self, delta: f64) -> Result<f64> {
        Ok(delta * self.omega(delta)?)
    }

    /// Inverse of χ on (0, χ(2π)], by bisection in log δ (monotone, so the
    /// relative interval width contracts unconditionally). 200-iteration cap.
    pub fn chi_inv(&self, u: f64) -> Result<f64> {
        let top = self.chi(TAU)?;
        if !(u > 0.0) || u > top * (1.0 + 1e-12) {
            return Err(CoreError::Domain(format!(
                "χ⁻¹ needs u in (0, {top:.6e}], got {u:.6e}"
            )));
        }
        if u >= top {
            return Ok(TAU);
        }
        self.solve_log(|m, d| m.chi(d), u)
    }

    /// ρ_j solving ω(ρ_j) = 2^{-j}; ρ_0 = 2π by normalization.
    pub fn rho(&self, j: u32) -> Result<f64> {
        if j == 0 {
            return Ok(TAU);
        }
        let target = (-(j as f64)).exp2();
        self.solve_log(|m, d| m.omega(d), target)
    }

    /// Activation scale a_j = 1/χ(ρ_j); a_0 = 1/(2π).
    pub fn activation(&self, j: u32) -> Result<f64> {
        Ok(1.0 / self.chi(self.rho(j)?)?)
    }

    /// Bisection in x = ln δ for a monotone map δ ↦ f(δ), to relative width
    /// 1e-14 (or the 200-iteration cap, whichever first).
    fn solve_log<F: Fn(&Self, f64) -> Result<f64>>(&self, f: F, target: f64) -> Result<f64> {
        let mut hi = TAU.ln();
        let mut lo = hi - 760.0; // down to ~2π·1e-330, below subnormal range of χ
        if !(f(self, lo.exp())? <= target) {
            return Err(CoreError::Numeric(format!(
                "bracket failure solving for target {target:.3e}"
            )));
        }
        let mut width = hi - lo;
        for _ in 0..200 {
            if width <= 1e-14 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(self, mid.exp())? < target {
                lo = mid;
            } else {
                hi = mid;
            }
            width = hi - lo;
        }
        let root = (0.5 * (lo + hi)).exp();
        let residual = (f(self, root)? - target).abs();
        if residual > 1e-8 * target.max(1e-300) {
            return Err(CoreError::Numeric(format!(
                "root solve did not converge: residual {residual:.3e} at target {target:.3e}"
            )));
        }
        Ok(root)
    }

    /// Θ(y) = (y/log y)·χ⁻¹((log y)²/y) for y > 1, saturating at the largest
    /// admissible argument when (log y)²/y exceeds χ(2π).
    pub fn theta(&self, y: f64) -> Result<f64> {
        if !(y > 1.0) {
            return Err(CoreError::Domain(format!("Θ needs y > 1, got {y}")));
        }
        let ly = y.ln();
        let arg = ly * ly / y;
        let top = self.chi(TAU)?;
        if arg > top {
            return Ok(y / ly * TAU);
        }
        Ok(y / ly * self.chi_inv(arg)?)
    }

    /// Θ_p(y) = (∫_1^y (χ⁻¹(1/τ))^p dτ)^{1/p} for p in (1, 2), by adaptive
    /// quadrature after the substitution τ = e^u. Relative tolerance 1e-6.
    pub fn theta_p(&self, p: f64, y: f64) -> Result<f64> {
        if !(p > 1.0 && p < 2.0) {
            return Err(CoreError::Domain(format!("Θ_p needs p in (1, 2), got {p}")));
        }
        if !(y >= 1.0) {
            return Err(CoreError::Domain(format!("Θ_p needs y ≥ 1, got {y}")));
        }
        if y == 1.0 {
            return Ok(0.0);
        }
        let integrand = |u: f64| -> f64 {
            let tau_val = u.exp();
            let x = self.chi_inv(1.0 / tau_val).expect("1/τ ≤ 1 ≤ χ(2π)");
            x.powf(p) * tau_val
        };
        let (integral, _) = adaptive_simpson(&integrand, 0.0, y.ln(), 1e-8, 48);
        Ok(integral.powf(1.0 / p))
    }
}
