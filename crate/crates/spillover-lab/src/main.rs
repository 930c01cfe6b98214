//! `spillover-lab` — command-line driver for the simulation harness.
//!
//! Every subcommand maps onto one harness entry point: the five data
//! commands (`graph`, `simulate`, `estimate`, `effects`, `test`) read a JSON
//! configuration, the two packaged commands (`reproduce`, `oracle`) run
//! preset studies and self-checks. Outputs are byte-deterministic in the
//! configuration and seed regardless of `--threads`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spillover_lab::graph::write_edge_list;
use spillover_lab::harness::{
    self, effects_study_config, histogram, histogram_auto, oracle_suite, run_effects_study,
    run_estimate, run_pvalue_study, run_simulate, run_test_batch, run_two_worlds,
    write_estimate_csv, write_histogram_csv, write_oracle_table, write_pvalue_csv,
    write_simulate_csv, write_test_batch_csv, write_two_worlds_csv, HistogramRow, Scenario,
    SimulationConfig, DEFAULT_SEED, TWO_WORLDS_N, TWO_WORLDS_REPLICATIONS,
};
use spillover_lab::seed::replicate_rng;
use spillover_lab::Result;

/// Simulation toolkit for causal inference under network interference.
#[derive(Parser)]
#[command(name = "spillover-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the configuration-driven subcommands.
#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file (use `-` to read from stdin).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output path; overrides the config's `out` (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core); falls back to SPILLOVER_LAB_THREADS.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the first replicate's interference graph as an edge list.
    Graph(ConfigArgs),
    /// Simulate unit-level data (assignment and outcomes) per replicate.
    Simulate(ConfigArgs),
    /// Simulate data and fit the random-field model per replicate.
    Estimate(ConfigArgs),
    /// Compare direct/indirect/total effects across computation routes.
    Effects(ConfigArgs),
    /// Run the interference test on freshly simulated data per replicate.
    Test(ConfigArgs),
    /// Re-run a packaged study and emit its table.
    Reproduce {
        /// Which packaged study to run.
        #[arg(long, value_enum)]
        figure: Figure,
        /// Master seed (default: the packaged seed).
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        /// Replicate count; defaults to the study's standard count.
        #[arg(long, value_name = "COUNT")]
        replications: Option<usize>,
        /// Output path (default: stdout).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core); falls back to SPILLOVER_LAB_THREADS.
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// Emit a binned histogram table instead of per-replicate rows;
        /// accepts `N` or `bins=N` (default 20 bins).
        #[arg(
            long,
            value_name = "BINS",
            num_args = 0..=1,
            default_missing_value = "20",
            value_parser = parse_bins
        )]
        emit_hist: Option<usize>,
    },
    /// Run enumeration-backed self-checks and print a pass/fail table.
    Oracle {
        /// Instance size for the enumerated checks.
        #[arg(long, default_value_t = 8, value_name = "UNITS")]
        n: usize,
        /// Master seed (default: the packaged seed).
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        /// Output path (default: stdout).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Packaged studies `reproduce` can re-run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// P-value study, scenarios a/b/c, 500 units.
    #[value(name = "pvals-500")]
    Pvals500,
    /// P-value study, scenarios a/b/c, 1000 units.
    #[value(name = "pvals-1000")]
    Pvals1000,
    /// Superstar two-worlds study (1000 units, 1000 replicates).
    #[value(name = "two-worlds")]
    TwoWorlds,
    /// Effects study at 500 units (Monte Carlo vs. closed form), JSON.
    #[value(name = "effects-500")]
    Effects500,
}

fn parse_bins(raw: &str) -> std::result::Result<usize, String> {
    let value = raw.strip_prefix("bins=").unwrap_or(raw);
    let bins: usize =
        value.parse().map_err(|_| format!("`{raw}` is not a bin count (use N or bins=N)"))?;
    if bins == 0 {
        return Err("bin count must be at least 1".into());
    }
    Ok(bins)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Graph(args) => with_config(args, |config| {
            let mut rng = replicate_rng(config.seed, 0);
            let sampled = config.graph.sample(config.n, &mut rng)?;
            let mut buf = Vec::new();
            write_edge_list(&sampled.graph, &mut buf)?;
            Ok(buf)
        }),
        Command::Simulate(args) => with_config(args, |config| {
            let rows = run_simulate(config)?;
            let mut buf = Vec::new();
            write_simulate_csv(&rows, &mut buf)?;
            Ok(buf)
        }),
        Command::Estimate(args) => with_config(args, |config| {
            let rows = run_estimate(config)?;
            let mut buf = Vec::new();
            write_estimate_csv(&rows, &mut buf)?;
            Ok(buf)
        }),
        Command::Effects(args) => with_config(args, |config| {
            let report = run_effects_study(config)?;
            render_json(&report)
        }),
        Command::Test(args) => with_config(args, |config| {
            let rows = run_test_batch(config)?;
            let mut buf = Vec::new();
            write_test_batch_csv(&rows, &mut buf)?;
            Ok(buf)
        }),
        Command::Reproduce { figure, seed, replications, out, threads, emit_hist } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let threads = harness::resolve_threads(threads)?;
            let bytes = harness::with_thread_pool(threads, || {
                reproduce_bytes(figure, seed, replications, emit_hist)
            })?;
            write_output(out.as_deref(), &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { n, seed, out } => {
            let checks = oracle_suite(n, seed.unwrap_or(DEFAULT_SEED))?;
            let mut buf = Vec::new();
            let all_pass = write_oracle_table(&checks, &mut buf)?;
            write_output(out.as_deref(), &buf)?;
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

/// Parses the config, applies flag overrides, and writes `body`'s bytes to
/// the resolved output.
fn with_config(
    args: ConfigArgs,
    body: impl FnOnce(&SimulationConfig) -> Result<Vec<u8>> + Send,
) -> Result<ExitCode> {
    let mut config = SimulationConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let threads = harness::resolve_threads(args.threads)?;
    let out = args.out.or_else(|| config.out.clone().map(PathBuf::from));
    let bytes = harness::with_thread_pool(threads, || body(&config))?;
    write_output(out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn render_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn reproduce_bytes(
    figure: Figure,
    seed: u64,
    replications: Option<usize>,
    emit_hist: Option<usize>,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match figure {
        Figure::Pvals500 | Figure::Pvals1000 => {
            let n = if figure == Figure::Pvals500 { 500 } else { 1000 };
            let reps = replications.unwrap_or(200);
            let mut rows = Vec::new();
            for scenario in Scenario::ALL {
                rows.extend(run_pvalue_study(scenario, n, reps, seed)?);
            }
            match emit_hist {
                Some(bins) => {
                    let mut hist = Vec::new();
                    for scenario in Scenario::ALL {
                        let values: Vec<f64> = rows
                            .iter()
                            .filter(|r| r.scenario == scenario.label())
                            .map(|r| r.p_value)
                            .collect();
                        hist.extend(histogram(&values, 0.0, 1.0, bins, scenario.label())?);
                    }
                    write_histogram_csv(&hist, &mut buf)?;
                }
                None => write_pvalue_csv(&rows, &mut buf)?,
            }
        }
        Figure::TwoWorlds => {
            let reps = replications.unwrap_or(TWO_WORLDS_REPLICATIONS);
            let rows = run_two_worlds(reps, TWO_WORLDS_N, seed)?;
            match emit_hist {
                Some(bins) => {
                    // Shared bin edges keep the two groups comparable.
                    let all: Vec<f64> = rows.iter().map(|r| r.avg_outcome).collect();
                    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
                    let mut hist: Vec<HistogramRow> = Vec::new();
                    for (flag, group) in
                        [(1u8, "treated_superstar"), (0u8, "no_treated_superstar")]
                    {
                        let values: Vec<f64> = rows
                            .iter()
                            .filter(|r| r.has_treated_superstar == flag)
                            .map(|r| r.avg_outcome)
                            .collect();
                        hist.extend(histogram(&values, lo, hi, bins, group)?);
                    }
                    write_histogram_csv(&hist, &mut buf)?;
                }
                None => write_two_worlds_csv(&rows, &mut buf)?,
            }
        }
        Figure::Effects500 => {
            let mut config = effects_study_config(seed);
            if let Some(reps) = replications {
                config.replications = reps;
            }
            let report = run_effects_study(&config)?;
            match emit_hist {
                Some(bins) => {
                    let values: Vec<f64> =
                        report.per_replicate.iter().map(|r| r.monte_carlo.indirect).collect();
                    let hist = histogram_auto(&values, bins, "mc_indirect")?;
                    write_histogram_csv(&hist, &mut buf)?;
                }
                None => buf = render_json(&report)?,
            }
        }
    }
    Ok(buf)
}
