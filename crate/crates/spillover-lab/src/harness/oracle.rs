//! Enumeration-backed self-checks (`oracle` subcommand).
//!
//! Every check here compares a fast computation against an exhaustive or
//! closed-form reference on instances small enough to enumerate, so a pass
//! is a mathematical statement about the code, not a statistical one:
//!
//! * Monte Carlo effects vs. exact enumeration over all assignments;
//! * total-effect additivity τ_T = τ_D + τ_I under enumeration;
//! * the sensitivity identity (total effect = summed ∂ E_X Y_i / ∂π_j);
//! * Horvitz–Thompson unbiasedness: the enumeration average of the
//!   estimator equals the exposure mean μ_N(d) exactly;
//! * the neighborhood-expansion mean series vs. the direct linear solve.

use std::io::Write;

use serde::Serialize;

use crate::design::{assignment_probability, enumerate_assignments, sample_assignment, Design};
use crate::error::{Error, Result};
use crate::estimand::{effects_enumeration, effects_monte_carlo, theorem1_check};
use crate::estimator::{
    exposure_probability_exact, exposure_value, ht_exposure_mean, ExposureLevel, ExposureMapping,
};
use crate::graph::{sample_rdpg, InterferenceGraph, RdpgParams};
use crate::outcome::{gmrf_mean, gmrf_mean_series, GmrfModel, GmrfParams};
use crate::seed::replicate_rng;

/// Outcome of one oracle check.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    /// Check name.
    pub name: &'static str,
    /// Worst observed discrepancy across instances.
    pub value: f64,
    /// Largest discrepancy the check accepts.
    pub tolerance: f64,
    /// Whether `value ≤ tolerance`.
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, pass: value <= tolerance }
    }
}

/// Number of random instances each statistical-free check runs over.
pub const ORACLE_INSTANCES: usize = 20;

fn random_instance(
    n: usize,
    index: u64,
    seed: u64,
) -> Result<(InterferenceGraph, GmrfParams, Vec<f64>, crate::seed::Rng)> {
    let mut rng = replicate_rng(seed, index);
    // Uniform latent positions keep small graphs reasonably connected.
    let positions = crate::graph::sample_latent_beta(n, 1.0, 1.0, &mut rng)?;
    let graph = sample_rdpg(&RdpgParams::new(positions, 0.9)?, &mut rng);
    let params = GmrfParams::new(2.0, 1.5, 0.4, 1.0)?;
    // Unit-varying probabilities exercise the general Bernoulli paths.
    let pi: Vec<f64> = (0..n).map(|i| 0.3 + 0.05 * (i % 4) as f64).collect();
    Ok((graph, params, pi, rng))
}

fn check_effects_routes(n: usize, instances: usize, seed: u64) -> Result<[OracleCheck; 3]> {
    let mut worst_mc_gap = 0.0_f64;
    let mut worst_additivity = 0.0_f64;
    let mut worst_sensitivity = 0.0_f64;
    for k in 0..instances {
        let (graph, params, pi, mut rng) = random_instance(n, k as u64, seed)?;
        let model = GmrfModel::new(params, &graph)?;
        let design = Design::bernoulli(pi.clone())?;
        let exact = effects_enumeration(&model, &design)?;
        let mc = effects_monte_carlo(&model, &design, 64, &mut rng)?;
        for (m, e) in [(&mc.direct, &exact.direct), (&mc.indirect, &exact.indirect), (&mc.total, &exact.total)] {
            let se = m.mc_se.unwrap_or(0.0);
            let gap = (m.value - e.value).abs();
            // Normalized gap: anything ≤ 1 is within 4 combined SEs (plus a
            // tiny absolute floor for exactly-zero-variance integrands).
            worst_mc_gap = worst_mc_gap.max(gap / (4.0 * se + 1e-9));
        }
        worst_additivity = worst_additivity
            .max((exact.total.value - (exact.direct.value + exact.indirect.value)).abs());
        let sensitivity = theorem1_check(&model, &pi, 1e-4)?;
        worst_sensitivity = worst_sensitivity.max(sensitivity.gap);
    }
    Ok([
        OracleCheck::new("monte_carlo_vs_enumeration_4se", worst_mc_gap, 1.0),
        OracleCheck::new("enumeration_total_additivity", worst_additivity, 0.0),
        OracleCheck::new("sensitivity_identity_gap", worst_sensitivity, 1e-5),
    ])
}

/// Fixed potential-outcome table for the unbiasedness check: depends only on
/// the unit and its exposure level, as the design-based theory requires.
fn potential_outcome(i: usize, level: &ExposureLevel) -> f64 {
    let base = 1.0 + 0.5 * i as f64;
    match level {
        ExposureLevel::Own(own) => base + 2.0 * f64::from(*own),
        ExposureLevel::Count { own, treated, .. } => {
            base + 2.0 * f64::from(*own) + 0.7 * *treated as f64
        }
        ExposureLevel::Bin { own, bin } => base + 2.0 * f64::from(*own) + 0.4 * *bin as f64,
    }
}

fn check_ht_unbiasedness(n: usize) -> Result<OracleCheck> {
    // A cycle is 2-regular, so one treated-neighbor-count level is shared by
    // every unit and positivity holds for all of them.
    let n = n.clamp(4, 10);
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect();
    let graph = InterferenceGraph::from_edges(n, &edges)?;
    let pi: Vec<f64> = (0..n).map(|i| 0.3 + 0.05 * (i % 3) as f64).collect();
    let design = Design::bernoulli(pi)?;
    let mapping = ExposureMapping::TreatedNeighborCount;
    let level = ExposureLevel::Count { own: 1, treated: 1, degree: 2 };
    let probabilities: Vec<f64> = (0..n)
        .map(|i| exposure_probability_exact(&mapping, &graph, &design, i, &level))
        .collect::<Result<_>>()?;

    let mut estimate_mean = 0.0;
    for x in enumerate_assignments(n)? {
        let weight = assignment_probability(&design, &x)?;
        let exposures: Vec<ExposureLevel> = (0..n)
            .map(|i| exposure_value(&mapping, &graph, &x, i))
            .collect::<Result<_>>()?;
        let y: Vec<f64> =
            exposures.iter().enumerate().map(|(i, e)| potential_outcome(i, e)).collect();
        estimate_mean += weight * ht_exposure_mean(&y, &exposures, &probabilities, &level)?;
    }
    let target: f64 =
        (0..n).map(|i| potential_outcome(i, &level)).sum::<f64>() / n as f64;
    Ok(OracleCheck::new("ht_enumeration_unbiasedness", (estimate_mean - target).abs(), 1e-10))
}

fn check_mean_series(n: usize, seed: u64) -> Result<OracleCheck> {
    let mut worst = 0.0_f64;
    for k in 0..4 {
        let (graph, _, pi, mut rng) = random_instance(n, 1000 + k, seed)?;
        let params = GmrfParams::new(2.0, 1.5, 0.5, 1.0)?;
        let design = Design::bernoulli(pi)?;
        let x = sample_assignment(&design, n, &mut rng)?;
        let direct = gmrf_mean(&params, &graph, &x)?;
        let series = gmrf_mean_series(&params, &graph, &x, 60)?;
        worst = worst.max((direct - series).abs().max());
    }
    Ok(OracleCheck::new("mean_series_vs_solve", worst, 1e-8))
}

/// Runs every oracle check on instances of size `n` (clamped to the
/// enumeration cap) and returns the table of results.
pub fn oracle_suite(n: usize, seed: u64) -> Result<Vec<OracleCheck>> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "oracle instance size n = {n} must lie in [2, 12] (assignments are enumerated)"
        )));
    }
    let [mc, additivity, sensitivity] = check_effects_routes(n, ORACLE_INSTANCES, seed)?;
    Ok(vec![mc, additivity, sensitivity, check_ht_unbiasedness(n)?, check_mean_series(n, seed)?])
}

/// Renders the pass/fail table; returns `true` when every check passed.
pub fn write_oracle_table<W: Write>(checks: &[OracleCheck], out: &mut W) -> Result<bool> {
    writeln!(out, "{:<36} {:>14} {:>10} {}", "check", "value", "tolerance", "result")?;
    let mut all_pass = true;
    for check in checks {
        all_pass &= check.pass;
        writeln!(
            out,
            "{:<36} {:>14.6e} {:>10.1e} {}",
            check.name,
            check.value,
            check.tolerance,
            if check.pass { "pass" } else { "FAIL" }
        )?;
    }
    Ok(all_pass)
}
