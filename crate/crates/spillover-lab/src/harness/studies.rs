//! Packaged simulation studies and machine-readable output tables.
//!
//! Three preset studies live here, each a pure function of `(parameters,
//! master seed)`:
//!
//! * [`run_pvalue_study`] — conditional randomization test p-values under
//!   the three spillover scenarios (treatment spillover only, both
//!   spillovers, outcome spillover only);
//! * [`run_two_worlds`] — average outcomes on a superstar-prone graph where
//!   a rare highly connected unit, when treated, shifts the whole
//!   population;
//! * [`run_effects_study`] — direct/indirect/total effects computed three
//!   ways (assignment Monte Carlo, exact enumeration where feasible, and
//!   the large-graph closed form) with standard errors and gaps.
//!
//! Each replicate draws all of its randomness from a stream derived from
//! `(master seed, replicate index)`, so replicates can run on any number of
//! worker threads without changing a byte of output. CSV writers format
//! reals with 17 significant digits and never consult the locale.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    DesignSpec, GraphSpec, OutcomeSpec, SampledGraph, ScalingSpec, SimulationConfig,
};
use crate::crt::{crt_pvalue, select_focal_random, TestPlan};
use crate::design::{sample_assignment, Design};
use crate::error::{Error, Result};
use crate::estimand::{
    effects_enumeration, effects_monte_carlo, theorem2_effects, EffectDecomposition,
    ESTIMAND_ENUMERATION_CAP,
};
use crate::estimator::gmrf_mle;
use crate::graph::{sample_beta_model, sample_latent_beta, sample_rdpg, BetaModelParams, RdpgParams};
use crate::outcome::{gmrf_sample, Boost, FixedLinearOutcome, GmrfModel, GmrfParams, OutcomeModel, Scaling};
use crate::seed::{derive_seed, replicate_rng};

/// Master seed used by the packaged presets when none is given.
pub const DEFAULT_SEED: u64 = 20260814;

/// Treatment probability π = 2/5 in the p-value study.
pub const PVALUE_TREAT_PROB: f64 = 0.4;
/// Fraction of units picked as focal in the p-value study.
pub const PVALUE_FOCAL_FRACTION: f64 = 0.3;
/// Resample count per test in the p-value study.
pub const PVALUE_RESAMPLES: usize = 500;
/// Conditional noise scale σ² in the p-value study generator.
pub const PVALUE_SIGMA2: f64 = 4.0;
/// Outcome-spillover constant as a fraction of the critical coupling: the
/// generator uses `c₂ = κ/‖α‖²` so the outcome-spillover strength is
/// comparable across graph draws.
pub const PVALUE_SPILLOVER_KAPPA: f64 = 0.5;

/// The three spillover scenarios of the p-value study.
///
/// Own-treatment effect β = 5 throughout; the scenarios vary which spillover
/// channel is active. The generator uses a raw-count treatment spillover
/// (every treated neighbor adds γ), which is the regime a treated-neighbor
/// outcome contrast is built to see, and a constant outcome-spillover
/// scaling at half the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Treatment spillover only: (β, γ, δ) = (5, 5, 0).
    A,
    /// Both spillovers: (β, γ, δ) = (5, 5, 0.75).
    B,
    /// Outcome spillover only: (β, γ, δ) = (5, 0, 0.75).
    C,
}

impl Scenario {
    /// All scenarios in label order.
    pub const ALL: [Scenario; 3] = [Scenario::A, Scenario::B, Scenario::C];

    /// Single-letter label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
        }
    }

    /// GMRF coefficients `(β, γ, δ)`.
    pub fn coefficients(self) -> (f64, f64, f64) {
        match self {
            Scenario::A => (5.0, 5.0, 0.0),
            Scenario::B => (5.0, 5.0, 0.75),
            Scenario::C => (5.0, 0.0, 0.75),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Scenario::A),
            "b" => Ok(Scenario::B),
            "c" => Ok(Scenario::C),
            other => Err(Error::InvalidParameter(format!(
                "scenario `{other}` is not one of a, b, c"
            ))),
        }
    }
}

/// Formats a real with 17 significant digits, independent of locale.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// One p-value study replicate.
#[derive(Debug, Clone, Serialize)]
pub struct PvalueRow {
    /// Scenario label (`a`, `b`, `c`).
    pub scenario: &'static str,
    /// Number of units.
    pub n: usize,
    /// Replicate index.
    pub replicate: usize,
    /// Seed this replicate's randomness derives from.
    pub seed: u64,
    /// Observed test statistic.
    pub observed_stat: f64,
    /// Conditional randomization p-value.
    pub p_value: f64,
}

/// Runs the p-value study for one scenario.
///
/// Per replicate: draw latent positions `α_i ~ Beta(1, 3)`, a rank-1 random
/// dot product graph with edge probability `α_i α_j`, a Bernoulli(2/5)
/// assignment, and outcomes from the scenario's GMRF; then test with 30%
/// random focal units, the treated-neighbor contrast statistic, and 500
/// conditional resamples.
pub fn run_pvalue_study(
    scenario: Scenario,
    n: usize,
    replications: usize,
    master: u64,
) -> Result<Vec<PvalueRow>> {
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    let (beta, gamma, delta) = scenario.coefficients();
    let rows: Vec<Result<PvalueRow>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(master, r as u64);
            let alpha = sample_latent_beta(n, 1.0, 3.0, rng)?;
            let norm_sq: f64 = alpha.iter().map(|v| v * v).sum();
            let graph = sample_rdpg(&RdpgParams::new(alpha, 1.0)?, rng);
            let design = Design::bernoulli_uniform(n, PVALUE_TREAT_PROB)?;
            let x = sample_assignment(&design, n, rng)?;
            let params = GmrfParams::new(beta, gamma, delta, PVALUE_SIGMA2)?
                .with_scaling(Scaling::RawConstant(PVALUE_SPILLOVER_KAPPA / norm_sq))?;
            let y = gmrf_sample(&params, &graph, &x, rng)?;
            let focal = select_focal_random(n, PVALUE_FOCAL_FRACTION, rng)?;
            let plan = TestPlan {
                focal,
                statistic: crate::crt::TestStatistic::TU,
                resamples: PVALUE_RESAMPLES,
                sidedness: crate::crt::Sidedness::Greater,
                design,
                seed: rand::Rng::gen(rng),
            };
            let report = crt_pvalue(&x, y.as_slice(), &graph, &plan)?;
            Ok(PvalueRow {
                scenario: scenario.label(),
                n,
                replicate: r,
                seed: derive_seed(master, r as u64),
                observed_stat: report.observed,
                p_value: report.p_value,
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// Writes p-value rows as CSV.
pub fn write_pvalue_csv<W: Write>(rows: &[PvalueRow], out: &mut W) -> Result<()> {
    writeln!(out, "scenario,n,replicate,seed,observed_stat,p_value")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.scenario,
            row.n,
            row.replicate,
            row.seed,
            fmt_real(row.observed_stat),
            fmt_real(row.p_value)
        )?;
    }
    Ok(())
}

/// Units in the two-worlds study.
pub const TWO_WORLDS_N: usize = 1000;
/// Replicates in the two-worlds study.
pub const TWO_WORLDS_REPLICATIONS: usize = 1000;
/// Own-treatment boost ε for superstars.
pub const TWO_WORLDS_BOOST: f64 = 10.0;

const TWO_WORLDS_SUPERSTAR_PROB: f64 = 1.0 / 1000.0;
const TWO_WORLDS_BASE_WEIGHT: f64 = -2.0;
const TWO_WORLDS_SUPERSTAR_WEIGHT: f64 = 20.0;
const TWO_WORLDS_TREAT_PROB: f64 = 0.5;

/// One two-worlds replicate.
#[derive(Debug, Clone, Serialize)]
pub struct TwoWorldsRow {
    /// Replicate index.
    pub replicate: usize,
    /// Seed this replicate's randomness derives from.
    pub seed: u64,
    /// Population average outcome `(1/N) Σ_i Y_i`.
    pub avg_outcome: f64,
    /// Number of superstar units in this replicate.
    pub n_superstars: usize,
    /// 1 when some unit is both a superstar and treated, else 0.
    pub has_treated_superstar: u8,
}

/// Runs the two-worlds study with the standard superstar boost ε = 10.
///
/// Per replicate: mark each unit a superstar with probability 1/1000, build
/// a degree-heterogeneous graph (edge probability `logistic(w_i + w_j)`,
/// weights 20 for superstars and −2 otherwise), assign treatment
/// Bernoulli(1/2), and draw outcomes from the GMRF (β=2, γ=2, δ=0.9, σ²=1,
/// neighborhood averages) where a treated superstar's own effect is
/// amplified to `β(1 + ε)`.
pub fn run_two_worlds(replications: usize, n: usize, master: u64) -> Result<Vec<TwoWorldsRow>> {
    run_two_worlds_boosted(replications, n, master, TWO_WORLDS_BOOST)
}

/// Two-worlds study with an explicit boost ε (ε = 0 removes the only
/// difference between replicates with and without a treated superstar).
pub fn run_two_worlds_boosted(
    replications: usize,
    n: usize,
    master: u64,
    epsilon: f64,
) -> Result<Vec<TwoWorldsRow>> {
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    let rows: Vec<Result<TwoWorldsRow>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(master, r as u64);
            let superstars: Vec<u8> = (0..n)
                .map(|_| u8::from(rand::Rng::gen::<f64>(rng) < TWO_WORLDS_SUPERSTAR_PROB))
                .collect();
            let weights = superstars
                .iter()
                .map(|&u| if u == 1 { TWO_WORLDS_SUPERSTAR_WEIGHT } else { TWO_WORLDS_BASE_WEIGHT })
                .collect();
            let graph = sample_beta_model(&BetaModelParams::new(weights)?, rng);
            let design = Design::bernoulli_uniform(n, TWO_WORLDS_TREAT_PROB)?;
            let x = sample_assignment(&design, n, rng)?;
            let params = GmrfParams::new(2.0, 2.0, 0.9, 1.0)?
                .with_boost(Boost::new(epsilon, superstars.clone())?);
            let y = gmrf_sample(&params, &graph, &x, rng)?;
            let has_treated_superstar =
                u8::from(superstars.iter().zip(&x).any(|(&u, &xi)| u == 1 && xi == 1));
            Ok(TwoWorldsRow {
                replicate: r,
                seed: derive_seed(master, r as u64),
                avg_outcome: y.mean(),
                n_superstars: superstars.iter().map(|&u| usize::from(u)).sum(),
                has_treated_superstar,
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// Writes two-worlds rows as CSV.
pub fn write_two_worlds_csv<W: Write>(rows: &[TwoWorldsRow], out: &mut W) -> Result<()> {
    writeln!(out, "replicate,seed,avg_outcome,n_superstars,has_treated_superstar")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.replicate,
            row.seed,
            fmt_real(row.avg_outcome),
            row.n_superstars,
            row.has_treated_superstar
        )?;
    }
    Ok(())
}

/// Point values for the three effects.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectTriple {
    /// Average own-treatment flip effect τ_D.
    pub direct: f64,
    /// Average sum of cross flip effects τ_I.
    pub indirect: f64,
    /// τ_T = τ_D + τ_I.
    pub total: f64,
}

impl EffectTriple {
    fn from_decomposition(d: &EffectDecomposition) -> Self {
        Self { direct: d.direct.value, indirect: d.indirect.value, total: d.total.value }
    }
}

/// Mean and standard error of one effect across graph replicates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectSummary {
    /// Mean across replicates.
    pub value: f64,
    /// Standard error of the mean (sample SD / √replicates).
    pub se: f64,
}

/// Replicate-level summaries for all three effects.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectAggregate {
    /// Direct effect summary.
    pub direct: EffectSummary,
    /// Indirect effect summary.
    pub indirect: EffectSummary,
    /// Total effect summary.
    pub total: EffectSummary,
}

/// One effects-study replicate.
#[derive(Debug, Clone, Serialize)]
pub struct EffectsReplicateRow {
    /// Replicate index.
    pub replicate: usize,
    /// Seed this replicate's randomness derives from.
    pub seed: u64,
    /// Assignment Monte Carlo values.
    pub monte_carlo: EffectTriple,
    /// Within-replicate Monte Carlo standard errors (over assignments).
    pub monte_carlo_se: EffectTriple,
    /// Large-graph closed form evaluated at the realized latent positions
    /// (random dot product graphs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<EffectTriple>,
    /// Exact enumeration over assignments (small n only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<EffectTriple>,
}

/// Effects study output: per-replicate values plus cross-replicate
/// aggregates and the gaps between computation routes.
#[derive(Debug, Clone, Serialize)]
pub struct EffectsStudyReport {
    /// The configuration that produced the report.
    pub config: SimulationConfig,
    /// Assignment draws per replicate used by the Monte Carlo route.
    pub mc_assignments: usize,
    /// Monte Carlo aggregates across replicates.
    pub monte_carlo: EffectAggregate,
    /// Closed-form aggregates (when latent positions are available).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<EffectAggregate>,
    /// Enumeration aggregates (when n is small enough).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<EffectAggregate>,
    /// |MC mean − closed-form mean| per effect.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_monte_carlo_vs_closed_form: Option<EffectTriple>,
    /// |MC mean − enumeration mean| per effect.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_monte_carlo_vs_enumeration: Option<EffectTriple>,
    /// Largest |τ_T − (τ_D + τ_I)| across replicates and routes.
    pub additivity_max_abs_gap: f64,
    /// Per-replicate rows in replicate order.
    pub per_replicate: Vec<EffectsReplicateRow>,
}

/// Default assignment draws per replicate for the Monte Carlo route.
pub const DEFAULT_MC_ASSIGNMENTS: usize = 20;

fn summarize(values: &[f64]) -> EffectSummary {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let se = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    EffectSummary { value: mean, se }
}

fn aggregate(triples: &[EffectTriple]) -> EffectAggregate {
    let pick = |f: fn(&EffectTriple) -> f64| -> Vec<f64> { triples.iter().map(f).collect() };
    EffectAggregate {
        direct: summarize(&pick(|t| t.direct)),
        indirect: summarize(&pick(|t| t.indirect)),
        total: summarize(&pick(|t| t.total)),
    }
}

fn gap(a: &EffectAggregate, b: &EffectAggregate) -> EffectTriple {
    EffectTriple {
        direct: (a.direct.value - b.direct.value).abs(),
        indirect: (a.indirect.value - b.indirect.value).abs(),
        total: (a.total.value - b.total.value).abs(),
    }
}

/// Runs the effects study defined by `config` (graph + design + GMRF
/// outcome required).
///
/// Each replicate samples a fresh graph, runs assignment Monte Carlo, and —
/// where available — the exact enumeration (n small) and the large-graph
/// closed form (latent positions known). Aggregates and route gaps are
/// computed across replicates.
pub fn run_effects_study(config: &SimulationConfig) -> Result<EffectsStudyReport> {
    config.validate()?;
    let design = config.design()?;
    let outcome = config.outcome()?;
    let gmrf_coeffs = match outcome {
        OutcomeSpec::Gmrf { beta, gamma, delta, .. } => Some((*beta, *gamma, *delta)),
        OutcomeSpec::FixedLinear { .. } => None,
    };
    let mc_assignments = config.mc_assignments.unwrap_or(DEFAULT_MC_ASSIGNMENTS);
    let enumerable = config.n <= ESTIMAND_ENUMERATION_CAP;

    let rows: Vec<Result<EffectsReplicateRow>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(config.seed, r as u64);
            let sampled = config.graph.sample(config.n, rng)?;
            let fixed;
            let gmrf;
            let model: &dyn OutcomeModel = match outcome {
                OutcomeSpec::Gmrf { .. } => {
                    let params = outcome.gmrf_params(&sampled)?;
                    gmrf = GmrfModel::new(params, &sampled.graph)?;
                    &gmrf
                }
                OutcomeSpec::FixedLinear { .. } => {
                    fixed = FixedLinearOutcome::new(outcome.fixed_linear()?, &sampled.graph);
                    &fixed
                }
            };
            let mc = effects_monte_carlo(model, &design, mc_assignments, rng)?;
            let closed_form = match (gmrf_coeffs, &sampled.positions) {
                (Some((beta, gamma, delta)), Some(positions)) => Some(EffectTriple::from_decomposition(
                    &theorem2_effects(beta, gamma, delta, positions)?,
                )),
                _ => None,
            };
            let enumeration = if enumerable {
                Some(EffectTriple::from_decomposition(&effects_enumeration(model, &design)?))
            } else {
                None
            };
            Ok(EffectsReplicateRow {
                replicate: r,
                seed: derive_seed(config.seed, r as u64),
                monte_carlo: EffectTriple::from_decomposition(&mc),
                monte_carlo_se: EffectTriple {
                    direct: mc.direct.mc_se.unwrap_or(0.0),
                    indirect: mc.indirect.mc_se.unwrap_or(0.0),
                    total: mc.total.mc_se.unwrap_or(0.0),
                },
                closed_form,
                enumeration,
            })
        })
        .collect();
    let per_replicate: Vec<EffectsReplicateRow> = rows.into_iter().collect::<Result<_>>()?;

    let mc_triples: Vec<EffectTriple> = per_replicate.iter().map(|r| r.monte_carlo).collect();
    let monte_carlo = aggregate(&mc_triples);
    let closed_triples: Option<Vec<EffectTriple>> =
        per_replicate.iter().map(|r| r.closed_form).collect();
    let closed_form = closed_triples.as_deref().map(aggregate);
    let enum_triples: Option<Vec<EffectTriple>> =
        per_replicate.iter().map(|r| r.enumeration).collect();
    let enumeration = enum_triples.as_deref().map(aggregate);

    let additivity_max_abs_gap = per_replicate
        .iter()
        .flat_map(|r| {
            [Some(&r.monte_carlo), r.closed_form.as_ref(), r.enumeration.as_ref()]
                .into_iter()
                .flatten()
                .map(|t| (t.total - (t.direct + t.indirect)).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0_f64, f64::max);

    Ok(EffectsStudyReport {
        config: config.clone(),
        mc_assignments,
        gap_monte_carlo_vs_closed_form: closed_form.as_ref().map(|cf| gap(&monte_carlo, cf)),
        gap_monte_carlo_vs_enumeration: enumeration.as_ref().map(|en| gap(&monte_carlo, en)),
        monte_carlo,
        closed_form,
        enumeration,
        additivity_max_abs_gap,
        per_replicate,
    })
}

/// The packaged effects-study configuration: 200 rank-1 random dot product
/// graphs on 500 units (`α_i ~ Beta(1, 3)`), Bernoulli(2/5) assignment, and
/// a GMRF with β = 5, γ = 0, δ = 0.75, σ² = 1 whose outcome-spillover
/// constant sits exactly at the critical coupling `1/‖α‖²` — the regime
/// where the closed-form decomposition applies.
pub fn effects_study_config(seed: u64) -> SimulationConfig {
    SimulationConfig {
        seed,
        scenario: Some("effects-500".into()),
        n: 500,
        replications: 200,
        graph: GraphSpec::RdpgBeta { a: 1.0, b: 3.0, rho: 1.0 },
        design: Some(DesignSpec::Bernoulli { probability: PVALUE_TREAT_PROB }),
        outcome: Some(OutcomeSpec::Gmrf {
            beta: 5.0,
            gamma: 0.0,
            delta: 0.75,
            sigma2: 1.0,
            scaling: ScalingSpec::DegreeSpectral { kappa: 1.0 },
            boost_epsilon: None,
        }),
        test: None,
        mc_assignments: Some(2),
        mle_delta_grid: None,
        out: None,
    }
}

/// One interference-test batch replicate.
#[derive(Debug, Clone, Serialize)]
pub struct TestBatchRow {
    /// Replicate index.
    pub replicate: usize,
    /// Scenario label echoed from the config.
    pub scenario: String,
    /// Number of units.
    pub n: usize,
    /// Statistic label.
    pub statistic: &'static str,
    /// Observed statistic.
    pub observed: f64,
    /// Conditional randomization p-value.
    pub p_value: f64,
    /// Seed this replicate's randomness derives from.
    pub seed: u64,
}

/// Generates data from the config's graph/design/outcome sections and runs
/// the interference test once per replicate.
pub fn run_test_batch(config: &SimulationConfig) -> Result<Vec<TestBatchRow>> {
    config.validate()?;
    let design = config.design()?;
    let outcome = config.outcome()?;
    let spec = config.test().cloned().unwrap_or_default();
    let scenario = config.scenario.clone().unwrap_or_else(|| "-".into());
    let rows: Vec<Result<TestBatchRow>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(config.seed, r as u64);
            let sampled = config.graph.sample(config.n, rng)?;
            let x = sample_assignment(&design, config.n, rng)?;
            let y = realize_outcomes(outcome, &sampled, &x, rng)?;
            let focal = select_focal_random(config.n, spec.focal_fraction, rng)?;
            let plan = TestPlan {
                focal,
                statistic: spec.statistic.resolve(),
                resamples: spec.resamples,
                sidedness: spec.sidedness.resolve(),
                design: design.clone(),
                seed: rand::Rng::gen(rng),
            };
            let report = crt_pvalue(&x, &y, &sampled.graph, &plan)?;
            Ok(TestBatchRow {
                replicate: r,
                scenario: scenario.clone(),
                n: config.n,
                statistic: spec.statistic.label(),
                observed: report.observed,
                p_value: report.p_value,
                seed: derive_seed(config.seed, r as u64),
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// Writes interference-test batch rows as CSV.
pub fn write_test_batch_csv<W: Write>(rows: &[TestBatchRow], out: &mut W) -> Result<()> {
    writeln!(out, "replicate,scenario,n,statistic,observed,p_value,seed")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.replicate,
            row.scenario,
            row.n,
            row.statistic,
            fmt_real(row.observed),
            fmt_real(row.p_value),
            row.seed
        )?;
    }
    Ok(())
}

/// Draws (or evaluates) one outcome vector for a sampled graph.
fn realize_outcomes(
    outcome: &OutcomeSpec,
    sampled: &SampledGraph,
    x: &[u8],
    rng: &mut crate::seed::Rng,
) -> Result<Vec<f64>> {
    match outcome {
        OutcomeSpec::Gmrf { .. } => {
            let params = outcome.gmrf_params(sampled)?;
            Ok(gmrf_sample(&params, &sampled.graph, x, rng)?.as_slice().to_vec())
        }
        OutcomeSpec::FixedLinear { .. } => {
            let model = FixedLinearOutcome::new(outcome.fixed_linear()?, &sampled.graph);
            Ok(model.mean(x)?.as_slice().to_vec())
        }
    }
}

/// One simulated unit-level observation.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateRow {
    /// Replicate index.
    pub replicate: usize,
    /// Unit index within the replicate.
    pub unit: usize,
    /// Seed the replicate's randomness derives from.
    pub seed: u64,
    /// Treatment indicator.
    pub x: u8,
    /// Outcome.
    pub y: f64,
}

/// Samples unit-level data (graph, assignment, outcomes) per replicate.
pub fn run_simulate(config: &SimulationConfig) -> Result<Vec<SimulateRow>> {
    config.validate()?;
    let design = config.design()?;
    let outcome = config.outcome()?;
    let rows: Vec<Result<Vec<SimulateRow>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(config.seed, r as u64);
            let sampled = config.graph.sample(config.n, rng)?;
            let x = sample_assignment(&design, config.n, rng)?;
            let y = realize_outcomes(outcome, &sampled, &x, rng)?;
            let seed = derive_seed(config.seed, r as u64);
            Ok((0..config.n)
                .map(|i| SimulateRow { replicate: r, unit: i, seed, x: x[i], y: y[i] })
                .collect())
        })
        .collect();
    let mut flat = Vec::with_capacity(config.replications * config.n);
    for block in rows {
        flat.extend(block?);
    }
    Ok(flat)
}

/// Writes simulated unit-level rows as CSV.
pub fn write_simulate_csv<W: Write>(rows: &[SimulateRow], out: &mut W) -> Result<()> {
    writeln!(out, "replicate,unit,seed,x,y")?;
    for row in rows {
        writeln!(out, "{},{},{},{},{}", row.replicate, row.unit, row.seed, row.x, fmt_real(row.y))?;
    }
    Ok(())
}

/// One likelihood fit on simulated data.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    /// Replicate index.
    pub replicate: usize,
    /// Seed the replicate's randomness derives from.
    pub seed: u64,
    /// Number of units.
    pub n: usize,
    /// Fitted own-treatment coefficient.
    pub beta_hat: f64,
    /// Fitted treatment-spillover coefficient.
    pub gamma_hat: f64,
    /// Fitted outcome-spillover coefficient.
    pub delta_hat: f64,
    /// Fitted conditional variance scale.
    pub sigma2_hat: f64,
    /// Log-likelihood at the fit.
    pub loglik: f64,
    /// 1 when the δ estimate sits at the search boundary.
    pub delta_at_boundary: u8,
}

/// Default δ-grid resolution for the likelihood fit.
pub const DEFAULT_MLE_DELTA_GRID: usize = 41;

/// Simulates data per replicate and fits the GMRF by profile likelihood.
pub fn run_estimate(config: &SimulationConfig) -> Result<Vec<EstimateRow>> {
    config.validate()?;
    let design = config.design()?;
    let outcome = config.outcome()?;
    let grid = config.mle_delta_grid.unwrap_or(DEFAULT_MLE_DELTA_GRID);
    let rows: Vec<Result<EstimateRow>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rng = &mut replicate_rng(config.seed, r as u64);
            let sampled = config.graph.sample(config.n, rng)?;
            let x = sample_assignment(&design, config.n, rng)?;
            let y = realize_outcomes(outcome, &sampled, &x, rng)?;
            let fit = gmrf_mle(&sampled.graph, &x, &y, grid)?;
            Ok(EstimateRow {
                replicate: r,
                seed: derive_seed(config.seed, r as u64),
                n: config.n,
                beta_hat: fit.beta_hat,
                gamma_hat: fit.gamma_hat,
                delta_hat: fit.delta_hat,
                sigma2_hat: fit.sigma2_hat,
                loglik: fit.loglik,
                delta_at_boundary: u8::from(fit.delta_at_boundary),
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// Writes likelihood-fit rows as CSV.
pub fn write_estimate_csv<W: Write>(rows: &[EstimateRow], out: &mut W) -> Result<()> {
    writeln!(out, "replicate,seed,n,beta_hat,gamma_hat,delta_hat,sigma2_hat,loglik,delta_at_boundary")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.replicate,
            row.seed,
            row.n,
            fmt_real(row.beta_hat),
            fmt_real(row.gamma_hat),
            fmt_real(row.delta_hat),
            fmt_real(row.sigma2_hat),
            fmt_real(row.loglik),
            row.delta_at_boundary
        )?;
    }
    Ok(())
}

/// One histogram bin.
#[derive(Debug, Clone, Serialize)]
pub struct HistogramRow {
    /// Series the bin belongs to.
    pub group: String,
    /// Inclusive lower bin edge.
    pub bin_lo: f64,
    /// Exclusive upper bin edge (inclusive for the last bin).
    pub bin_hi: f64,
    /// Number of values in the bin.
    pub count: usize,
}

/// Bins `values` into `bins` equal-width bins over `[lo, hi]`.
///
/// Values outside `[lo, hi]` clamp to the end bins; the top edge is
/// inclusive so `hi` lands in the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize, group: &str) -> Result<Vec<HistogramRow>> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least 1 bin".into()));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "histogram range [{lo}, {hi}] must have hi > lo"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramRow {
            group: group.to_string(),
            bin_lo: lo + i as f64 * width,
            bin_hi: lo + (i + 1) as f64 * width,
            count,
        })
        .collect())
}

/// Bins `values` over their own (slightly padded) range.
pub fn histogram_auto(values: &[f64], bins: usize, group: &str) -> Result<Vec<HistogramRow>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    histogram(values, lo, hi, bins, group)
}

/// Writes histogram rows as CSV.
pub fn write_histogram_csv<W: Write>(rows: &[HistogramRow], out: &mut W) -> Result<()> {
    writeln!(out, "group,bin_lo,bin_hi,count")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.group,
            fmt_real(row.bin_lo),
            fmt_real(row.bin_hi),
            row.count
        )?;
    }
    Ok(())
}
