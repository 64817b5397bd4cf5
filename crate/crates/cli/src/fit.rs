//! Growth-exponent fitting and envelope comparison.
//!
//! Fits are weighted least squares of log(interval midpoint) against log λ,
//! with weights inverse to the log-interval half-widths. The default window
//! is the upper half of the λ grid (the asymptotic regime).

use crate::run::NormRow;
use anyhow::{bail, Result};

#[derive(Debug, Clone)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// λ range actually used.
    pub window: (f64, f64),
    pub residual_max: f64,
    pub rows_used: usize,
}

fn rows_for_p(rows: &[NormRow], p: f64) -> Vec<&NormRow> {
    rows.iter().filter(|r| (r.p - p).abs() < 1e-9).collect()
}

/// The default fit window: the upper half (by count) of the distinct λ values.
pub fn default_window(rows: &[NormRow], p: f64) -> Result<(f64, f64)> {
    let mut lambdas: Vec<f64> = rows_for_p(rows, p).iter().map(|r| r.lambda).collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup();
    if lambdas.is_empty() {
        bail!("no rows at p = {p}");
    }
    let start = lambdas.len() / 2;
    Ok((lambdas[start], lambdas[lambdas.len() - 1]))
}

/// Weighted least-squares fit of log(mid) vs log λ over the window.
pub fn fit_exponent(rows: &[NormRow], p: f64, window: (f64, f64)) -> Result<GrowthFit> {
    let selected: Vec<&NormRow> = rows_for_p(rows, p)
        .into_iter()
        .filter(|r| r.lambda >= window.0 - 1e-12 && r.lambda <= window.1 + 1e-12)
        .collect();
    if selected.len() < 4 {
        bail!(
            "degenerate window: need at least 4 rows, found {} in [{}, {}]",
            selected.len(),
            window.0,
            window.1
        );
    }
    let mut pts = Vec::with_capacity(selected.len());
    for r in &selected {
        let mid = r.mid();
        if !(mid > 0.0) || !(r.lo > 0.0) || !r.hi.is_finite() {
            bail!(
                "row (λ = {}, p = {}) has a non-positive or infinite interval",
                r.lambda,
                r.p
            );
        }
        let x = r.lambda.ln();
        let y = mid.ln();
        let half_log = 0.5 * (r.hi / r.lo).ln();
        let weight = 1.0 / (half_log + 1e-9);
        pts.push((x, y, weight));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xbar = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let ybar = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar) * (p.0 - xbar)).sum();
    if sxx <= 1e-12 {
        bail!("degenerate window: no spread in λ");
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    let mut residual_max = 0.0_f64;
    for (x, y, w) in &pts {
        let r = y - (intercept + slope * x);
        ss_res += w * r * r;
        residual_max = residual_max.max(r.abs());
    }
    let dof = (pts.len() - 2) as f64;
    let std_error = (ss_res / dof / sxx).sqrt();
    Ok(GrowthFit {
        exponent: slope,
        intercept,
        std_error,
        window,
        residual_max,
        rows_used: pts.len(),
    })
}

#[derive(Debug, Clone)]
pub struct EnvelopeRow {
    pub lambda: f64,
    pub envelope: f64,
    pub ratio_mid: f64,
    pub ratio_hi: f64,
}

#[derive(Debug, Clone)]
pub struct EnvelopeComparison {
    pub rows: Vec<EnvelopeRow>,
    /// Geometric mean of the mid ratios: the fitted multiplicative constant.
    pub fitted_constant: f64,
    pub max_min_ratio_mid: f64,
    pub max_min_ratio_hi: f64,
}

/// Per-λ ratios of the measured norms to an envelope, with the spread
/// statistics that the stability claims quantify.
pub fn compare_envelopes<F: Fn(f64) -> Result<f64>>(
    rows: &[NormRow],
    p: f64,
    envelope: F,
) -> Result<EnvelopeComparison> {
    let selected = rows_for_p(rows, p);
    if selected.is_empty() {
        bail!("no rows at p = {p}");
    }
    let mut out = Vec::with_capacity(selected.len());
    for r in selected {
        let env = envelope(r.lambda)?;
        if !(env > 0.0) {
            bail!("envelope not positive at λ = {}", r.lambda);
        }
        out.push(EnvelopeRow {
            lambda: r.lambda,
            envelope: env,
            ratio_mid: r.mid() / env,
            ratio_hi: r.hi / env,
        });
    }
    let gm = (out.iter().map(|r| r.ratio_mid.ln()).sum::<f64>() / out.len() as f64).exp();
    let spread = |f: fn(&EnvelopeRow) -> f64| {
        let max = out.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let min = out.iter().map(f).fold(f64::INFINITY, f64::min);
        max / min
    };
    Ok(EnvelopeComparison {
        fitted_constant: gm,
        max_min_ratio_mid: spread(|r| r.ratio_mid),
        max_min_ratio_hi: spread(|r| r.ratio_hi),
        rows: out,
    })
}
