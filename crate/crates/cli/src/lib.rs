//! Experiment orchestration for the norm-growth laboratory: configs,
//! λ sweeps, exponent fits, envelope comparisons, and static artifacts.

// negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fit;
pub mod plot;
pub mod run;

pub use config::ExperimentConfig;
pub use fit::{compare_envelopes, default_window, fit_exponent, GrowthFit};
pub use run::{norms_csv, run_norms, witness_csv, witness_suite, NormRow};

/// Builds the global thread pool, honoring the `APNORM_THREADS` cap and the
/// config's parallelism degree. Safe to call more than once.
pub fn init_threads(config_threads: usize) {
    let env_cap = std::env::var("APNORM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let requested = match (config_threads, env_cap) {
        (0, None) => return,
        (0, Some(e)) => e,
        (c, None) => c,
        (c, Some(e)) => c.min(e),
    };
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(requested)
        .build_global();
}
