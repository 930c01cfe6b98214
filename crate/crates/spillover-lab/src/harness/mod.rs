//! Simulation harness: JSON configuration, packaged studies, deterministic
//! seeding, and machine-readable CSV/JSON outputs.
//!
//! The harness is what the `spillover-lab` binary drives, but everything
//! here is callable as a library: parse a [`SimulationConfig`], run a study,
//! and write its rows. Determinism is the organizing principle — every
//! replicate derives its random stream from `(master seed, replicate
//! index)`, rows are emitted in replicate order, and floats are printed with
//! 17 significant digits — so identical inputs give byte-identical outputs
//! on any thread count.

pub mod config;
pub mod oracle;
pub mod studies;

pub use config::{
    DesignSpec, GraphSpec, OutcomeSpec, SampledGraph, ScalingSpec, SidednessSpec,
    SimulationConfig, StatisticSpec, TestSpec,
};
pub use oracle::{oracle_suite, write_oracle_table, OracleCheck, ORACLE_INSTANCES};
pub use studies::{
    effects_study_config, fmt_real, histogram, histogram_auto, run_effects_study, run_estimate,
    run_pvalue_study, run_simulate, run_test_batch, run_two_worlds, run_two_worlds_boosted,
    write_estimate_csv, write_histogram_csv, write_pvalue_csv, write_simulate_csv,
    write_test_batch_csv, write_two_worlds_csv, EffectAggregate, EffectSummary, EffectTriple,
    EffectsReplicateRow, EffectsStudyReport, EstimateRow, HistogramRow, PvalueRow, Scenario,
    SimulateRow, TestBatchRow, TwoWorldsRow, DEFAULT_MC_ASSIGNMENTS, DEFAULT_MLE_DELTA_GRID,
    DEFAULT_SEED, PVALUE_FOCAL_FRACTION, PVALUE_RESAMPLES, PVALUE_SIGMA2,
    PVALUE_SPILLOVER_KAPPA, PVALUE_TREAT_PROB, TWO_WORLDS_BOOST, TWO_WORLDS_N,
    TWO_WORLDS_REPLICATIONS,
};

use crate::error::{Error, Result};

/// Environment variable consulted when `--threads` is not given.
pub const THREADS_ENV: &str = "SPILLOVER_LAB_THREADS";

/// Resolves the worker-thread count: explicit flag, then the
/// `SPILLOVER_LAB_THREADS` environment variable, then 0 (all cores).
pub fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!("{THREADS_ENV} = {raw:?} is not a thread count"))
        }),
        Err(_) => Ok(0),
    }
}

/// Runs `body` inside a dedicated rayon pool with `threads` workers
/// (0 = one per core). Outputs do not depend on the pool size; the knob only
/// bounds resource use.
pub fn with_thread_pool<T: Send>(
    threads: usize,
    body: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(body)
}
