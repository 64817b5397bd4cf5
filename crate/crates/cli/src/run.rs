//! The sweep runner: builds the configured phase, computes one spectrum per
//! λ, and evaluates every requested A_p interval. Results come back in grid
//! order regardless of scheduling, so identical configs produce identical
//! CSV bytes.

use crate::config::{EngineChoice, ExperimentConfig, PhaseKind};
use anyhow::{anyhow, bail, Result};
use apnorm_core::bounds::{self, WitnessReport};
use apnorm_core::phases::{self, PhaseFn};
use apnorm_core::spectrum::{self, Spectrum};
use apnorm_core::{CoreError, Modulus};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct NormRow {
    pub lambda: f64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub band: i64,
    pub tail: f64,
    pub engine: &'static str,
}

impl NormRow {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

pub const NORMS_HEADER: &str = "lambda,p,norm_lo,norm_hi,band_K,tail,engine";
pub const WITNESS_HEADER: &str = "lambda,k,t,measured,threshold,pass";

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds the configured phase together with its modulus.
pub fn build_phase(cfg: &ExperimentConfig) -> Result<(PhaseFn, Modulus)> {
    let m = cfg.modulus()?;
    let phi = match cfg.phase_kind {
        PhaseKind::Linear => phases::linear_phase(cfg.phase_slope, cfg.phase_offset),
        PhaseKind::Cos => phases::cos_phase(),
        PhaseKind::Pl => phases::pl_phase(&cfg.phase_breakpoints, &cfg.phase_values)?,
        PhaseKind::Cantor => phases::cantor_primitive(&m, cfg.phase_depth)?,
        PhaseKind::Nested => {
            let (phi, sched) = phases::nested_phase(&m, cfg.phase_levels, cfg.phase_depth)?;
            if sched.levels < cfg.phase_levels {
                bail!(
                    "nested construction stopped early at {} of {} levels",
                    sched.levels,
                    cfg.phase_levels
                );
            }
            phi
        }
        PhaseKind::Diffeo => {
            let base = match cfg.phase_base {
                PhaseKind::Cos => phases::cos_phase(),
                PhaseKind::Cantor => phases::cantor_primitive(&m, cfg.phase_depth)?,
                PhaseKind::Pl => phases::pl_phase(&cfg.phase_breakpoints, &cfg.phase_values)?,
                other => bail!("diffeo base must be cos, cantor, or pl, got {other}"),
            };
            phases::diffeo(&base, cfg.phase_epsilon)?
        }
    };
    Ok((phi, m))
}

fn spectrum_for(cfg: &ExperimentConfig, phi: &PhaseFn, lambda: f64) -> Result<Spectrum> {
    let band = cfg.band_for(lambda);
    let use_dft = match cfg.engine {
        EngineChoice::Auto => phi.is_smooth(),
        EngineChoice::Exact => false,
        EngineChoice::Dft => true,
    };
    let spec = if use_dft {
        spectrum::coeffs_dft(phi, lambda, band, cfg.dft_oversample)?
    } else {
        spectrum::coeffs_affine_exact(phi, lambda, band)?
    };
    Ok(spec)
}

/// One row per (λ, p), λ outer and p inner, λ grid in increasing order.
pub fn run_norms(cfg: &ExperimentConfig) -> Result<Vec<NormRow>> {
    let (phi, _m) = build_phase(cfg)?;
    let grid = cfg.lambda_grid();
    let rows: Result<Vec<Vec<NormRow>>> = grid
        .par_iter()
        .map(|&lambda| {
            let spec = spectrum_for(cfg, &phi, lambda)?;
            cfg.p_values
                .iter()
                .map(|&p| {
                    let n = spectrum::ap_norm(&spec, p)?;
                    Ok(NormRow {
                        lambda,
                        p,
                        lo: n.lo,
                        hi: n.hi,
                        band: n.band,
                        tail: n.tail,
                        engine: spec.engine.as_str(),
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// UTF-8 CSV with `\n` line endings and 17 significant digits.
pub fn norms_csv(rows: &[NormRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + 64);
    out.push_str(NORMS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(r.lambda),
            fmt17(r.p),
            fmt17(r.lo),
            fmt17(r.hi),
            r.band,
            fmt17(r.tail),
            r.engine
        );
    }
    out
}

pub fn parse_norms_csv(text: &str) -> Result<Vec<NormRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty CSV"))?;
    if header != NORMS_HEADER {
        bail!("unexpected CSV header `{header}`");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            bail!("row {}: expected 7 fields, got {}", i + 2, f.len());
        }
        rows.push(NormRow {
            lambda: f[0].parse()?,
            p: f[1].parse()?,
            lo: f[2].parse()?,
            hi: f[3].parse()?,
            band: f[4].parse()?,
            tail: f[5].parse()?,
            engine: match f[6] {
                "exact" => "exact",
                "dft" => "dft",
                other => bail!("row {}: unknown engine `{other}`", i + 2),
            },
        });
    }
    Ok(rows)
}

#[derive(Debug)]
pub struct WitnessSuite {
    pub rows: Vec<WitnessReport>,
    pub passed: usize,
    pub failed: usize,
    /// min over rows of measured/threshold; infinite when no rows ran.
    pub min_margin: f64,
    /// Set when the phase admits no k at all (constant/linear phases).
    pub no_admissible: bool,
}

/// Runs the stationary-window checks over the configured λ grid, with up to
/// `witness.count` equispaced admissible k per λ.
pub fn witness_suite(cfg: &ExperimentConfig) -> Result<WitnessSuite> {
    let (phi, m) = build_phase(cfg)?;
    let lip = bounds::lip_estimate(&phi, &m)?;
    let range = bounds::derivative_range(&phi);
    if !(range.0 < range.1) || lip == 0.0 {
        return Ok(WitnessSuite {
            rows: Vec::new(),
            passed: 0,
            failed: 0,
            min_margin: f64::INFINITY,
            no_admissible: true,
        });
    }
    let grid = cfg.lambda_grid();
    let tasks: Vec<(f64, i64)> = grid
        .iter()
        .flat_map(|&lambda| {
            bounds::admissible_k(range, lambda, cfg.witness_count)
                .into_iter()
                .map(move |k| (lambda, k))
        })
        .collect();
    let rows: Result<Vec<WitnessReport>, CoreError> = tasks
        .par_iter()
        .map(|&(lambda, k)| bounds::witness(&phi, &m, lip, lambda, k))
        .collect();
    let rows = rows?;
    let passed = rows.iter().filter(|r| r.pass).count();
    let failed = rows.len() - passed;
    let min_margin = rows
        .iter()
        .map(|r| r.measured / r.threshold)
        .fold(f64::INFINITY, f64::min);
    Ok(WitnessSuite {
        rows,
        passed,
        failed,
        min_margin,
        no_admissible: false,
    })
}

pub fn witness_csv(suite: &WitnessSuite) -> String {
    let mut out = String::new();
    out.push_str(WITNESS_HEADER);
    out.push('\n');
    for r in &suite.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt17(r.lambda),
            r.k,
            fmt17(r.t),
            fmt17(r.measured),
            fmt17(r.threshold),
            r.pass
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn linear_phase_rows_are_exact_ones() {
        let cfg = ExperimentConfig::parse(
            "phase.kind = linear\nphase.slope = 2\nlambda.min = 4\nlambda.max = 64\n\
             lambda.count = 5\np = 1, 1.5, 2\nband.policy = fixed\nband.fixed = 256\n",
        )
        .unwrap();
        let rows = run_norms(&cfg).unwrap();
        assert_eq!(rows.len(), 15);
        for r in &rows {
            assert_eq!((r.lo, r.hi), (1.0, 1.0), "λ={}, p={}", r.lambda, r.p);
        }
    }

    #[test]
    fn p2_rows_bracket_one_for_every_phase() {
        for kind in ["cos", "pl", "cantor"] {
            let cfg = ExperimentConfig::parse(&format!(
                "phase.kind = {kind}\nphase.depth = 5\nlambda.min = 8\nlambda.max = 32\n\
                 lambda.count = 3\np = 2\nband.policy = fixed\nband.fixed = 512\n"
            ))
            .unwrap();
            for r in run_norms(&cfg).unwrap() {
                assert!(r.lo <= 1.0 && 1.0 <= r.hi);
            }
        }
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let cfg = ExperimentConfig::parse(
            "phase.kind = pl\nlambda.min = 8\nlambda.max = 64\nlambda.count = 4\np = 1\n",
        )
        .unwrap();
        let rows = run_norms(&cfg).unwrap();
        let csv = norms_csv(&rows);
        assert!(csv.starts_with("lambda,p,norm_lo,norm_hi,band_K,tail,engine\n"));
        let parsed = parse_norms_csv(&csv).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (a, b) in rows.iter().zip(parsed.iter()) {
            assert_eq!(a.lambda, b.lambda);
            assert_eq!(a.lo, b.lo);
            assert_eq!(a.hi, b.hi);
        }
    }

    #[test]
    fn deterministic_rerun() {
        let cfg = ExperimentConfig::parse(
            "phase.kind = cantor\nphase.depth = 6\nlambda.min = 16\nlambda.max = 128\n\
             lambda.count = 5\np = 1, 1.5\nseed = 42\n",
        )
        .unwrap();
        let a = norms_csv(&run_norms(&cfg).unwrap());
        let b = norms_csv(&run_norms(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn witness_on_constant_phase_reports_no_admissible() {
        let cfg = ExperimentConfig::parse(
            "phase.kind = linear\nphase.slope = 0\nphase.offset = 1.0\n\
             lambda.min = 64\nlambda.max = 256\nlambda.count = 2\np = 1\n",
        )
        .unwrap();
        let suite = witness_suite(&cfg).unwrap();
        assert!(suite.no_admissible);
        assert_eq!(suite.rows.len(), 0);
    }
}
