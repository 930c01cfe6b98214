//! Design-based and model-based estimators of exposure means and effects.
//!
//! The design-based track works through *exposure mappings*: each unit's
//! assignment vector is summarized into a discrete level (own treatment,
//! treated-neighbor count, or binned treated-neighbor fraction), and means of
//! the form `μ_N(d) = (1/N) Σ_i Y_i(d)` are estimated by inverse-probability
//! weighting:
//!
//! * [`ht_exposure_mean`] — Horvitz–Thompson, unbiased under known exposure
//!   probabilities;
//! * [`hajek_exposure_mean`] — self-normalized, location-equivariant;
//! * [`dr_exposure_mean`] — doubly robust, combining an estimated propensity
//!   with an outcome regression; consistent when either nuisance is correct.
//!
//! Exact exposure probabilities under Bernoulli designs come from a
//! Poisson-binomial recursion over each unit's neighborhood; any design can
//! be handled by the Monte Carlo path. Positivity failures are hard errors
//! naming the offending unit — silently dropping units would change the
//! estimand.
//!
//! The model-based track ([`gmrf_mle`], [`plugin_effects`]) fits the
//! Gaussian Markov random field by profile maximum likelihood and plugs the
//! fitted coefficients into the closed-form effect decomposition.

mod mle;
mod nuisance;

pub use mle::{gmrf_mle, gmrf_profile_curve, plugin_effects, MleFit, DELTA_BOUNDARY_MARGIN};
pub use nuisance::{fit_outcome_regression, fit_propensity, ConfounderMatrix, PropensityFit, RegressionFit};

use std::fmt;

use serde::Serialize;

use crate::design::Design;
use crate::error::{Error, Result};
use crate::estimand::{EffectEstimate, EstimandKind, Method};
use crate::graph::InterferenceGraph;
use crate::seed::Rng;

/// How a full assignment vector is collapsed into one unit's exposure level.
#[derive(Debug, Clone, PartialEq)]
pub enum ExposureMapping {
    /// Level is the unit's own treatment indicator.
    OwnTreatment,
    /// Level is `(own treatment, # treated neighbors, degree)`.
    TreatedNeighborCount,
    /// Level is `(own treatment, bin index)` for the treated-neighbor
    /// fraction; isolated units have fraction 0 by convention.
    TreatedNeighborFractionBinned {
        /// Strictly increasing bin edges from 0.0 to 1.0 inclusive.
        edges: Vec<f64>,
    },
}

impl ExposureMapping {
    /// Fraction binning with validated edges (strictly increasing, first 0,
    /// last 1). Bins are left-closed; the final bin also includes 1.
    pub fn fraction_binned(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 bin edges".into()));
        }
        if edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
            return Err(Error::InvalidParameter(
                "bin edges must start at 0.0 and end at 1.0".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("bin edges must be strictly increasing".into()));
        }
        Ok(Self::TreatedNeighborFractionBinned { edges })
    }
}

/// A discrete exposure level; `Ord`/`Hash` so levels can key tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureLevel {
    /// Own-treatment indicator.
    Own(u8),
    /// `(own, # treated neighbors, degree)`.
    Count { own: u8, treated: usize, degree: usize },
    /// `(own, fraction bin index)`.
    Bin { own: u8, bin: usize },
}

impl fmt::Display for ExposureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExposureLevel::Own(v) => write!(f, "own={v}"),
            ExposureLevel::Count { own, treated, degree } => {
                write!(f, "own={own},k={treated},deg={degree}")
            }
            ExposureLevel::Bin { own, bin } => write!(f, "own={own},bin={bin}"),
        }
    }
}

fn bin_index(edges: &[f64], fraction: f64) -> usize {
    let bins = edges.len() - 1;
    for b in 0..bins {
        if fraction < edges[b + 1] {
            return b;
        }
    }
    bins - 1
}

/// Exposure level of unit `i` under assignment `x`.
pub fn exposure_value(
    mapping: &ExposureMapping,
    graph: &InterferenceGraph,
    x: &[u8],
    i: usize,
) -> Result<ExposureLevel> {
    crate::design::validate_assignment(x, graph.n())?;
    if i >= graph.n() {
        return Err(Error::DimensionMismatch(format!("unit {i} out of range for n = {}", graph.n())));
    }
    let own = x[i];
    Ok(match mapping {
        ExposureMapping::OwnTreatment => ExposureLevel::Own(own),
        ExposureMapping::TreatedNeighborCount => {
            let treated = graph.neighbors(i).iter().filter(|&&j| x[j] == 1).count();
            ExposureLevel::Count { own, treated, degree: graph.degree(i) }
        }
        ExposureMapping::TreatedNeighborFractionBinned { edges } => {
            let degree = graph.degree(i);
            let fraction = if degree == 0 {
                0.0
            } else {
                graph.neighbors(i).iter().filter(|&&j| x[j] == 1).count() as f64 / degree as f64
            };
            ExposureLevel::Bin { own, bin: bin_index(edges, fraction) }
        }
    })
}

/// Distribution of the number of treated neighbors: Poisson-binomial over
/// independent Bernoulli(π_j) draws.
fn treated_count_pmf(probabilities: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; probabilities.len() + 1];
    pmf[0] = 1.0;
    for (m, &p) in probabilities.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}

/// Exact probability that unit `i`'s exposure equals `level` under a
/// Bernoulli design. Levels that are structurally impossible (wrong degree,
/// count exceeding degree) have probability 0; a level variant that does not
/// match the mapping is an error.
pub fn exposure_probability_exact(
    mapping: &ExposureMapping,
    graph: &InterferenceGraph,
    design: &Design,
    i: usize,
    level: &ExposureLevel,
) -> Result<f64> {
    let n = graph.n();
    if i >= n {
        return Err(Error::DimensionMismatch(format!("unit {i} out of range for n = {n}")));
    }
    let probabilities = match design {
        Design::Bernoulli { probabilities } => probabilities,
        _ => {
            return Err(Error::InvalidParameter(
                "exact exposure probabilities require a Bernoulli design; use the Monte Carlo path"
                    .into(),
            ))
        }
    };
    design.validate_for(n)?;
    let own_prob = |own: u8| -> f64 {
        match own {
            1 => probabilities[i],
            0 => 1.0 - probabilities[i],
            _ => 0.0,
        }
    };
    let neighbor_probs: Vec<f64> =
        graph.neighbors(i).iter().map(|&j| probabilities[j]).collect();
    match (mapping, level) {
        (ExposureMapping::OwnTreatment, ExposureLevel::Own(v)) => Ok(own_prob(*v)),
        (ExposureMapping::TreatedNeighborCount, ExposureLevel::Count { own, treated, degree }) => {
            if *degree != graph.degree(i) || *treated > *degree {
                return Ok(0.0);
            }
            Ok(own_prob(*own) * treated_count_pmf(&neighbor_probs)[*treated])
        }
        (
            ExposureMapping::TreatedNeighborFractionBinned { edges },
            ExposureLevel::Bin { own, bin },
        ) => {
            if *bin >= edges.len() - 1 {
                return Ok(0.0);
            }
            let degree = graph.degree(i);
            let mass = if degree == 0 {
                if *bin == bin_index(edges, 0.0) {
                    1.0
                } else {
                    0.0
                }
            } else {
                let pmf = treated_count_pmf(&neighbor_probs);
                (0..=degree)
                    .filter(|&k| bin_index(edges, k as f64 / degree as f64) == *bin)
                    .map(|k| pmf[k])
                    .sum()
            };
            Ok(own_prob(*own) * mass)
        }
        _ => Err(Error::InvalidParameter(format!(
            "exposure level {level} does not belong to the requested mapping"
        ))),
    }
}

/// Monte Carlo exposure probability for any design: empirical frequency of
/// `level` over `replications` sampled assignments, with its binomial
/// standard error.
pub fn exposure_probability_mc(
    mapping: &ExposureMapping,
    graph: &InterferenceGraph,
    design: &Design,
    i: usize,
    level: &ExposureLevel,
    replications: usize,
    rng: &mut Rng,
) -> Result<(f64, f64)> {
    if replications < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 replications".into()));
    }
    design.validate_for(graph.n())?;
    let mut hits = 0usize;
    for _ in 0..replications {
        let x = crate::design::sample_assignment(design, graph.n(), rng)?;
        if exposure_value(mapping, graph, &x, i)? == *level {
            hits += 1;
        }
    }
    let p = hits as f64 / replications as f64;
    let se = (p * (1.0 - p) / replications as f64).sqrt();
    Ok((p, se))
}

/// Horvitz–Thompson estimator of the own-treatment contrast:
/// `(1/N) Σ_i [y_i 1(x_i=1)/π_i − y_i 1(x_i=0)/(1−π_i)]`.
pub fn ht_direct(y: &[f64], x: &[u8], pi: &[f64]) -> Result<EffectEstimate> {
    let n = y.len();
    if x.len() != n || pi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "y, x, pi must share a length (got {n}, {}, {})",
            x.len(),
            pi.len()
        )));
    }
    crate::design::validate_assignment(x, n)?;
    for (i, &p) in pi.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(format!(
                "pi[{i}] = {p} must lie strictly inside (0, 1)"
            )));
        }
    }
    let value = y
        .iter()
        .zip(x)
        .zip(pi)
        .map(|((&yi, &xi), &pi)| if xi == 1 { yi / pi } else { -yi / (1.0 - pi) })
        .sum::<f64>()
        / n as f64;
    Ok(EffectEstimate {
        estimand: EstimandKind::Direct,
        value,
        mc_se: None,
        method: Method::DesignBased,
        replications: None,
    })
}

fn check_weighting_inputs(
    y: &[f64],
    exposures: &[ExposureLevel],
    probabilities: &[f64],
) -> Result<()> {
    if exposures.len() != y.len() || probabilities.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "y, exposures, probabilities must share a length (got {}, {}, {})",
            y.len(),
            exposures.len(),
            probabilities.len()
        )));
    }
    Ok(())
}

/// Horvitz–Thompson estimator of the exposure mean `μ_N(d)`:
/// `(1/N) Σ_i y_i 1(exposure_i = d) / p_i`, where `p_i = P(f_i(X) = d)`.
///
/// Every unit must have positive probability of reaching level `d`;
/// a zero anywhere is a positivity violation naming the unit.
pub fn ht_exposure_mean(
    y: &[f64],
    exposures: &[ExposureLevel],
    probabilities: &[f64],
    d: &ExposureLevel,
) -> Result<f64> {
    check_weighting_inputs(y, exposures, probabilities)?;
    for (i, &p) in probabilities.iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::PositivityViolation { unit: i, level: d.to_string() });
        }
    }
    let total: f64 = y
        .iter()
        .zip(exposures)
        .zip(probabilities)
        .filter(|((_, e), _)| *e == d)
        .map(|((&yi, _), &pi)| yi / pi)
        .sum();
    Ok(total / y.len() as f64)
}

/// Hájek (self-normalized) estimator of the exposure mean:
/// `Σ y_i 1(·=d)/p_i ÷ Σ 1(·=d)/p_i`.
///
/// Defined only when at least one unit sits at level `d`; reduces to the
/// plain average of those units' outcomes when their probabilities are equal.
pub fn hajek_exposure_mean(
    y: &[f64],
    exposures: &[ExposureLevel],
    probabilities: &[f64],
    d: &ExposureLevel,
) -> Result<f64> {
    check_weighting_inputs(y, exposures, probabilities)?;
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (i, ((&yi, e), &pi)) in y.iter().zip(exposures).zip(probabilities).enumerate() {
        if e == d {
            if !(pi > 0.0) {
                return Err(Error::PositivityViolation { unit: i, level: d.to_string() });
            }
            numerator += yi / pi;
            denominator += 1.0 / pi;
        }
    }
    if denominator == 0.0 {
        return Err(Error::UndefinedEstimate(format!(
            "no unit observed at exposure level {d}; the Hajek ratio is undefined"
        )));
    }
    Ok(numerator / denominator)
}

/// Doubly robust estimator of the exposure mean:
/// `(1/N) Σ_i [(y_i − m̂(d;C_i)) 1(·=d)/ψ̂(d;C_i) + m̂(d;C_i)]`.
///
/// `psi_hat` and `m_hat` are evaluators `(level, confounder row) → value`
/// (see [`PropensityFit::predictor`] and [`RegressionFit::predictor`]).
/// The estimate is consistent when either nuisance is correct; with
/// `m_hat ≡ 0` it reduces exactly to Horvitz–Thompson with weights `ψ̂`.
pub fn dr_exposure_mean<P, M>(
    y: &[f64],
    exposures: &[ExposureLevel],
    confounders: &ConfounderMatrix,
    d: &ExposureLevel,
    psi_hat: P,
    m_hat: M,
) -> Result<f64>
where
    P: Fn(&ExposureLevel, &[f64]) -> f64,
    M: Fn(&ExposureLevel, &[f64]) -> f64,
{
    let n = y.len();
    if exposures.len() != n || confounders.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "y, exposures, confounders must share a length (got {n}, {}, {})",
            exposures.len(),
            confounders.n()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let c = confounders.row(i);
        let psi = psi_hat(d, c);
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(Error::PositivityViolation { unit: i, level: d.to_string() });
        }
        let m = m_hat(d, c);
        if !m.is_finite() {
            return Err(Error::UndefinedEstimate(format!(
                "outcome regression undefined at level {d} for unit {i}"
            )));
        }
        let indicator = if exposures[i] == *d { 1.0 } else { 0.0 };
        total += (y[i] - m) * indicator / psi + m;
    }
    Ok(total / n as f64)
}

/// Contrast `μ̂(d1) − μ̂(d2)` between two estimated exposure means.
pub fn exposure_contrast(mu_at_d1: f64, mu_at_d2: f64) -> EffectEstimate {
    EffectEstimate {
        estimand: EstimandKind::ExposureContrast,
        value: mu_at_d1 - mu_at_d2,
        mc_se: None,
        method: Method::DesignBased,
        replications: None,
    }
}

/// Number of units observed at exposure level `d`.
pub fn count_at_level(exposures: &[ExposureLevel], d: &ExposureLevel) -> usize {
    exposures.iter().filter(|e| *e == d).count()
}

/// Machine-readable summary of one estimator run.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorReport {
    /// Estimator tag, e.g. "horvitz_thompson", "hajek", "doubly_robust".
    pub estimator: String,
    /// Display form of the level(s) the estimate refers to.
    pub levels: Vec<String>,
    /// Point estimate.
    pub value: f64,
    /// Standard error when one is available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    /// Units observed at the (first) requested level.
    pub n_at_level: usize,
    /// Whether positivity held for the run (reports are only produced on
    /// success, so this is false only for reports built from error paths).
    pub positivity_ok: bool,
}
