//! `apnorm` — certified A_p norm sweeps over the phase catalogue.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 a checked
//! threshold was violated (witness failures), 3 internal numeric failure.

use anyhow::{anyhow, bail, Context, Result};
use apnorm_cli::config::ExperimentConfig;
use apnorm_cli::{fit, plot, run};
use apnorm_core::{bounds, CoreError, Modulus};
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "apnorm", version, about = "A_p norm growth laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a norm sweep from a config file and emit the CSV table.
    Norms {
        config: PathBuf,
        /// Output file (default: the config's output.csv, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a growth exponent to a norms CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        p: f64,
        /// λ window as LO:HI (default: the upper half of the grid).
        #[arg(long)]
        window: Option<String>,
    },
    /// Run the stationary-window witness suite from a config file.
    Witness {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a norms CSV against a theoretical envelope.
    Envelopes {
        csv: PathBuf,
        #[arg(long, value_parser = ["lower", "thetaA", "thetaAp", "c2"])]
        kind: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        modulus: ModulusArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a norms CSV as a log-log SVG plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional envelope overlay kind.
        #[arg(long, value_parser = ["lower", "thetaA", "thetaAp", "c2"])]
        envelope: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        modulus: ModulusArgs,
    },
}

#[derive(Args)]
struct ModulusArgs {
    /// Modulus kind for envelope evaluation.
    #[arg(long = "modulus", default_value = "power", value_parser = ["power", "power-log"])]
    modulus_kind: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
}

impl ModulusArgs {
    fn build(&self) -> Result<Modulus> {
        let m = match self.modulus_kind.as_str() {
            "power" => Modulus::power(self.alpha),
            "power-log" => Modulus::power_log(self.alpha, self.beta),
            other => bail!("unknown modulus kind `{other}`"),
        };
        m.map_err(|e| anyhow!("modulus construction: {e}"))
    }
}

fn envelope_fn<'a>(kind: &'a str, m: &'a Modulus, p: f64) -> impl Fn(f64) -> Result<f64> + 'a {
    move |lambda: f64| {
        let v = match kind {
            "lower" => bounds::lower_env(m, p, lambda),
            "thetaA" => bounds::upper_env_a(m, lambda),
            "thetaAp" => bounds::upper_env_ap(m, p, lambda),
            "c2" => bounds::c2_env(p, lambda),
            other => return Err(anyhow!("unknown envelope `{other}`")),
        };
        v.map_err(anyhow::Error::from)
    }
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path:?}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    ExperimentConfig::parse(&text).with_context(|| format!("parsing {path:?}"))
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("window must be LO:HI, got `{s}`"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

// exit 2 is reserved for threshold violations
struct ThresholdViolation(String);

fn run_command(cmd: Command) -> Result<Option<ThresholdViolation>> {
    match cmd {
        Command::Norms { config, out } => {
            let cfg = load_config(&config)?;
            apnorm_cli::init_threads(cfg.threads);
            let rows = run::run_norms(&cfg)?;
            let csv = run::norms_csv(&rows);
            let target = out.or_else(|| cfg.output_csv.clone().map(PathBuf::from));
            write_output(&csv, target.as_ref())?;
            Ok(None)
        }
        Command::Fit { csv, p, window } => {
            let rows = run::parse_norms_csv(&fs::read_to_string(&csv)?)?;
            let chosen = match window {
                Some(w) => parse_window(&w)?,
                None => fit::default_window(&rows, p)?,
            };
            let report = |tag: &str, f: &fit::GrowthFit| {
                println!(
                    "fit p={p} window={tag} [{:.6e}, {:.6e}]: exponent={:.6e} stderr={:.6e} intercept={:.6e} residual_max={:.6e} rows={}",
                    f.window.0, f.window.1, f.exponent, f.std_error, f.intercept, f.residual_max, f.rows_used
                );
            };
            let default_fit = fit::fit_exponent(&rows, p, chosen)?;
            report("chosen", &default_fit);
            let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
            let full = (
                lambdas.iter().copied().fold(f64::INFINITY, f64::min),
                lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            );
            if full != chosen {
                if let Ok(f) = fit::fit_exponent(&rows, p, full) {
                    report("full", &f);
                }
            }
            Ok(None)
        }
        Command::Witness { config, out } => {
            let cfg = load_config(&config)?;
            apnorm_cli::init_threads(cfg.threads);
            let suite = run::witness_suite(&cfg)?;
            if suite.no_admissible {
                eprintln!(
                    "warning: no admissible k (derivative range is degenerate); zero tests run"
                );
                write_output(&run::witness_csv(&suite), out.as_ref())?;
                return Ok(None);
            }
            let csv = run::witness_csv(&suite);
            write_output(&csv, out.as_ref())?;
            eprintln!(
                "witness suite: {} passed, {} failed, min margin {:.6}",
                suite.passed, suite.failed, suite.min_margin
            );
            if suite.failed > 0 {
                return Ok(Some(ThresholdViolation(format!(
                    "{} of {} witness checks failed",
                    suite.failed,
                    suite.passed + suite.failed
                ))));
            }
            Ok(None)
        }
        Command::Envelopes {
            csv,
            kind,
            p,
            modulus,
            out,
        } => {
            let rows = run::parse_norms_csv(&fs::read_to_string(&csv)?)?;
            let m = modulus.build()?;
            let env = envelope_fn(&kind, &m, p);
            let cmp = fit::compare_envelopes(&rows, p, env)?;
            let mut text = String::from("lambda,envelope,ratio_mid,ratio_hi\n");
            for r in &cmp.rows {
                let _ = writeln!(
                    text,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.lambda, r.envelope, r.ratio_mid, r.ratio_hi
                );
            }
            let _ = writeln!(text, "# fitted_constant = {:.16e}", cmp.fitted_constant);
            let _ = writeln!(text, "# max_min_ratio_mid = {:.16e}", cmp.max_min_ratio_mid);
            let _ = writeln!(text, "# max_min_ratio_hi = {:.16e}", cmp.max_min_ratio_hi);
            write_output(&text, out.as_ref())?;
            Ok(None)
        }
        Command::Plot {
            csv,
            out,
            envelope,
            p,
            modulus,
        } => {
            let rows = run::parse_norms_csv(&fs::read_to_string(&csv)?)?;
            let overlay = match &envelope {
                Some(kind) => {
                    let m = modulus.build()?;
                    let env = envelope_fn(kind, &m, p);
                    let mut lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
                    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    lambdas.dedup();
                    let pts: Result<Vec<(f64, f64)>> =
                        lambdas.iter().map(|&l| Ok((l, env(l)?))).collect();
                    Some((kind.clone(), pts?))
                }
                None => None,
            };
            let svg = match &overlay {
                Some((label, pts)) => {
                    plot::render_svg(&rows, &csv.display().to_string(), Some((label, pts)))?
                }
                None => plot::render_svg(&rows, &csv.display().to_string(), None)?,
            };
            fs::write(&out, svg).with_context(|| format!("writing {out:?}"))?;
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is a config error
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run_command(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(ThresholdViolation(msg))) => {
            eprintln!("threshold violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<CoreError>(), Some(CoreError::Numeric(_))));
            ExitCode::from(if numeric { 3 } else { 1 })
        }
    }
}
