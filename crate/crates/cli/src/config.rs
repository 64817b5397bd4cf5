//! Line-oriented experiment configuration: `key = value` with `#` comments
//! and dotted keys. Parse errors carry line numbers.

use anyhow::{anyhow, bail, Context, Result};
use apnorm_core::Modulus;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Linear,
    Cos,
    Pl,
    Cantor,
    Nested,
    Diffeo,
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseKind::Linear => "linear",
            PhaseKind::Cos => "cos",
            PhaseKind::Pl => "pl",
            PhaseKind::Cantor => "cantor",
            PhaseKind::Nested => "nested",
            PhaseKind::Diffeo => "diffeo",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandPolicy {
    /// K = ceil(scale·λ^{3/2}), floored at band.min.
    Lambda32,
    /// K = ceil(scale·λ²), floored at band.min.
    Lambda2,
    /// K = band.fixed.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Auto,
    Exact,
    Dft,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub phase_kind: PhaseKind,
    pub phase_slope: i64,
    pub phase_offset: f64,
    pub phase_breakpoints: Vec<f64>,
    pub phase_values: Vec<f64>,
    pub phase_depth: u32,
    pub phase_levels: u32,
    pub phase_epsilon: f64,
    pub phase_base: PhaseKind,
    pub modulus_kind: String,
    pub modulus_alpha: f64,
    pub modulus_beta: f64,
    pub modulus_nodes: Vec<(f64, f64)>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub p_values: Vec<f64>,
    pub band_policy: BandPolicy,
    pub band_scale: f64,
    pub band_min: i64,
    pub band_fixed: i64,
    pub engine: EngineChoice,
    pub dft_oversample: u32,
    pub threads: usize,
    pub seed: u64,
    pub witness_count: usize,
    pub output_csv: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            phase_kind: PhaseKind::Cos,
            phase_slope: 1,
            phase_offset: 0.0,
            phase_breakpoints: vec![0.0, std::f64::consts::PI, std::f64::consts::TAU],
            phase_values: vec![0.0, 1.0, 0.0],
            phase_depth: 8,
            phase_levels: 4,
            phase_epsilon: 0.5,
            phase_base: PhaseKind::Cantor,
            modulus_kind: "power".into(),
            modulus_alpha: 0.5,
            modulus_beta: 0.0,
            modulus_nodes: Vec::new(),
            lambda_min: 64.0,
            lambda_max: 4096.0,
            lambda_count: 13,
            p_values: vec![1.0],
            band_policy: BandPolicy::Lambda32,
            band_scale: 1.0,
            band_min: 1,
            band_fixed: 1024,
            engine: EngineChoice::Auto,
            dft_oversample: 4,
            threads: 0,
            seed: 0,
            witness_count: 16,
            output_csv: None,
        }
    }
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("{e}: `{s}`")))
        .collect()
}

fn parse_nodes(v: &str) -> Result<Vec<(f64, f64)>> {
    v.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| anyhow!("node `{pair}` is not of the form delta:omega"))?;
            Ok((a.trim().parse::<f64>()?, b.trim().parse::<f64>()?))
        })
        .collect()
}

impl ExperimentConfig {
    /// Parses the `key = value` format. Unknown keys, bad values, and
    /// malformed lines are reported with their line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, got `{raw}`"))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                bail!("line {line_no}: key `{key}` already set on line {prev}");
            }
            cfg.apply(key, value)
                .with_context(|| format!("line {line_no}: key `{key}`"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "phase.kind" => {
                self.phase_kind = parse_kind(value)?;
            }
            "phase.slope" => self.phase_slope = value.parse()?,
            "phase.offset" => self.phase_offset = value.parse()?,
            "phase.breakpoints" => self.phase_breakpoints = parse_f64_list(value)?,
            "phase.values" => self.phase_values = parse_f64_list(value)?,
            "phase.depth" => self.phase_depth = value.parse()?,
            "phase.levels" => self.phase_levels = value.parse()?,
            "phase.epsilon" => self.phase_epsilon = value.parse()?,
            "phase.base" => self.phase_base = parse_kind(value)?,
            // phase.alpha is shorthand for a power modulus exponent
            "phase.alpha" | "modulus.alpha" => self.modulus_alpha = value.parse()?,
            "modulus.kind" => self.modulus_kind = value.to_string(),
            "modulus.beta" => self.modulus_beta = value.parse()?,
            "modulus.nodes" => self.modulus_nodes = parse_nodes(value)?,
            "lambda.min" => self.lambda_min = value.parse()?,
            "lambda.max" => self.lambda_max = value.parse()?,
            "lambda.count" => self.lambda_count = value.parse()?,
            "p" => self.p_values = parse_f64_list(value)?,
            "band.policy" => {
                self.band_policy = match value {
                    "lambda32" => BandPolicy::Lambda32,
                    "lambda2" => BandPolicy::Lambda2,
                    "fixed" => BandPolicy::Fixed,
                    other => bail!("unknown band policy `{other}`"),
                }
            }
            "band.scale" => self.band_scale = value.parse()?,
            "band.min" => self.band_min = value.parse()?,
            "band.fixed" => self.band_fixed = value.parse()?,
            "engine" => {
                self.engine = match value {
                    "auto" => EngineChoice::Auto,
                    "exact" => EngineChoice::Exact,
                    "dft" => EngineChoice::Dft,
                    other => bail!("unknown engine `{other}`"),
                }
            }
            "dft.oversample" => self.dft_oversample = value.parse()?,
            "threads" => self.threads = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "witness.count" => self.witness_count = value.parse()?,
            "output.csv" => self.output_csv = Some(value.to_string()),
            other => bail!("unknown key `{other}`"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_min >= 2.0) {
            bail!("lambda.min must be at least 2, got {}", self.lambda_min);
        }
        if !(self.lambda_max >= self.lambda_min) {
            bail!(
                "lambda grid must be increasing: min {} > max {}",
                self.lambda_min,
                self.lambda_max
            );
        }
        if self.lambda_count == 0 || (self.lambda_count == 1 && self.lambda_max > self.lambda_min) {
            bail!("lambda.count too small for the requested range");
        }
        if self.p_values.is_empty() {
            bail!("need at least one p value");
        }
        for &p in &self.p_values {
            if !(1.0..=2.0).contains(&p) {
                bail!("p values must lie in [1, 2], got {p}");
            }
        }
        if self.band_scale <= 0.0 || self.band_min < 1 || self.band_fixed < 1 {
            bail!("band parameters must be positive");
        }
        if self.dft_oversample < 4 {
            bail!("dft.oversample must be at least 4");
        }
        if self.engine == EngineChoice::Exact && matches!(self.effective_kind(), PhaseKind::Cos) {
            bail!("engine = exact cannot handle the smooth cos phase; use auto or dft");
        }
        Ok(())
    }

    fn effective_kind(&self) -> PhaseKind {
        if self.phase_kind == PhaseKind::Diffeo {
            self.phase_base
        } else {
            self.phase_kind
        }
    }

    pub fn modulus(&self) -> Result<Modulus> {
        let m = match self.modulus_kind.as_str() {
            "power" => Modulus::power(self.modulus_alpha),
            "power-log" => Modulus::power_log(self.modulus_alpha, self.modulus_beta),
            "tabulated" => Modulus::tabulated(&self.modulus_nodes),
            other => bail!("unknown modulus kind `{other}`"),
        };
        m.map_err(|e| anyhow!("modulus construction: {e}"))
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        apnorm_core::util::log_grid(self.lambda_min, self.lambda_max, self.lambda_count)
    }

    pub fn band_for(&self, lambda: f64) -> i64 {
        let k = match self.band_policy {
            BandPolicy::Lambda32 => (self.band_scale * lambda.abs().powf(1.5)).ceil() as i64,
            BandPolicy::Lambda2 => (self.band_scale * lambda * lambda).ceil() as i64,
            BandPolicy::Fixed => self.band_fixed,
        };
        k.max(self.band_min)
    }
}

fn parse_kind(value: &str) -> Result<PhaseKind> {
    Ok(match value {
        "linear" => PhaseKind::Linear,
        "cos" => PhaseKind::Cos,
        "pl" => PhaseKind::Pl,
        "cantor" => PhaseKind::Cantor,
        "nested" => PhaseKind::Nested,
        "diffeo" => PhaseKind::Diffeo,
        other => bail!("unknown phase kind `{other}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# sweep over the staircase primitive
phase.kind = cantor
phase.depth = 9
modulus.kind = power
modulus.alpha = 0.5
lambda.min = 64
lambda.max = 4096
lambda.count = 13
p = 1, 1.2, 1.8
band.policy = lambda32
band.min = 4096
engine = exact
seed = 7
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.phase_kind, PhaseKind::Cantor);
        assert_eq!(cfg.phase_depth, 9);
        assert_eq!(cfg.p_values, vec![1.0, 1.2, 1.8]);
        assert_eq!(cfg.band_for(64.0), 4096);
        assert_eq!(cfg.band_for(4096.0), 262144);
        let grid = cfg.lambda_grid();
        assert_eq!(grid.len(), 13);
        assert_eq!(grid[0], 64.0);
        assert_eq!(grid[12], 4096.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("phase.kind = cantor\nbogus_key = 3\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"), "{e:#}");
        let e = ExperimentConfig::parse("lambda.min: 2\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 1"), "{e:#}");
        let e = ExperimentConfig::parse("p = 0.5\n").unwrap_err();
        assert!(format!("{e:#}").contains("[1, 2]"), "{e:#}");
        let e = ExperimentConfig::parse("lambda.min = 1\n").unwrap_err();
        assert!(format!("{e:#}").contains("at least 2"), "{e:#}");
    }

    #[test]
    fn duplicate_keys_rejected() {
        let e = ExperimentConfig::parse("seed = 1\nseed = 2\n").unwrap_err();
        assert!(format!("{e:#}").contains("already set on line 1"));
    }

    #[test]
    fn phase_alpha_is_modulus_shorthand() {
        let cfg = ExperimentConfig::parse("phase.kind = cantor\nphase.alpha = 0.7\n").unwrap();
        assert_eq!(cfg.modulus_alpha, 0.7);
    }
}
