//! Causal estimands under interference and their calculators.
//!
//! With outcomes that depend on the whole assignment vector, the usual
//! "average treatment effect" splits into several distinct targets:
//!
//! * **all-or-nothing** `τ_ALL = (1/N) Σ_i (E Y_i(1_N) − E Y_i(0_N))`;
//! * **direct** `τ_D = (1/N) Σ_i E_X D_i(X_{−i})` where
//!   `D_j(x_{−i}) = E Y_j(x_i=1, x_{−i}) − E Y_j(x_i=0, x_{−i})` is the effect
//!   of flipping unit `i` on unit `j`;
//! * **indirect** `τ_I = (1/N) Σ_i Σ_{j≠i} E_X D_j(X_{−i})`;
//! * **total** `τ_T = τ_D + τ_I`.
//!
//! Three computational routes are provided and cross-checked: exact
//! enumeration over all assignments (small `n`; the brute-force oracle),
//! Monte Carlo over assignments using the models' one-solve flip effects, and
//! the closed form for large dense random dot product graphs, which needs
//! only the latent positions through the scalar
//! `a(δ) = δ·(1ᵀα)(‖α‖₂² I − δ αᵀα)^{-1}(αᵀ1)/N`.
//!
//! Two structural identities serve as further oracles: the sensitivity
//! identity (`τ_T` equals the summed derivatives of expected outcomes with
//! respect to the assignment probabilities under a Bernoulli design) and the
//! exact additivity `τ_T = τ_D + τ_I`.
//!
//! Estimands are defined on *expected* outcomes, so Monte Carlo here averages
//! over assignments only — outcome noise integrates out analytically.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{enumerate_assignments, Design};
use crate::error::{Error, Result};
use crate::outcome::OutcomeModel;
use crate::seed::{replicate_rng, Rng};

/// Enumeration cap for exact estimand calculations (2^{n−1} terms per unit).
pub const ESTIMAND_ENUMERATION_CAP: usize = 12;
/// Enumeration cap for exhaustive assignment search.
pub const SEARCH_ENUMERATION_CAP: usize = 20;

/// Which causal quantity an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimandKind {
    Direct,
    Indirect,
    Total,
    AllOrNothing,
    ExposureContrast,
    Welfare,
}

/// How an estimate was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact enumeration over assignments.
    Enumeration,
    /// Monte Carlo over assignments (carries an `mc_se`).
    MonteCarlo,
    /// Closed-form evaluation (model means or the large-graph formula).
    ClosedForm,
    /// Design-based estimate from observed data (see the estimator module).
    DesignBased,
}

/// A single effect value with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct EffectEstimate {
    /// Target quantity.
    pub estimand: EstimandKind,
    /// Point value.
    pub value: f64,
    /// Monte Carlo standard error; present iff `method` is `MonteCarlo`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_se: Option<f64>,
    /// Computational route.
    pub method: Method,
    /// Replication count for Monte Carlo values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
}

impl EffectEstimate {
    fn exact(estimand: EstimandKind, value: f64, method: Method) -> Self {
        Self { estimand, value, mc_se: None, method, replications: None }
    }

    fn monte_carlo(estimand: EstimandKind, value: f64, se: f64, replications: usize) -> Self {
        Self { estimand, value, mc_se: Some(se), method: Method::MonteCarlo, replications: Some(replications) }
    }
}

/// The direct/indirect/total decomposition produced by one calculation.
#[derive(Debug, Clone, Serialize)]
pub struct EffectDecomposition {
    pub direct: EffectEstimate,
    pub indirect: EffectEstimate,
    pub total: EffectEstimate,
}

/// All-or-nothing effect `(1/N) Σ_i (E Y_i(1_N) − E Y_i(0_N))`.
pub fn tau_all(model: &dyn OutcomeModel) -> Result<EffectEstimate> {
    let n = model.n();
    let treated = model.mean(&vec![1u8; n])?;
    let control = model.mean(&vec![0u8; n])?;
    let value = (treated - control).mean();
    Ok(EffectEstimate::exact(EstimandKind::AllOrNothing, value, Method::ClosedForm))
}

/// Probability of the sub-assignment `x_{−i}` under a Bernoulli design.
fn bernoulli_weight_excluding(probabilities: &[f64], x: &[u8], skip: usize) -> f64 {
    let mut w = 1.0;
    for (j, (&xj, &pj)) in x.iter().zip(probabilities).enumerate() {
        if j == skip {
            continue;
        }
        w *= if xj == 1 { pj } else { 1.0 - pj };
    }
    w
}

/// Exact direct/indirect/total effects by enumerating `X_{−i}` for every `i`
/// under a Bernoulli design. Hard-capped at `n ≤ 12`.
pub fn effects_enumeration(
    model: &dyn OutcomeModel,
    design: &Design,
) -> Result<EffectDecomposition> {
    let n = model.n();
    if n > ESTIMAND_ENUMERATION_CAP {
        return Err(Error::EnumerationCap { requested: n, cap: ESTIMAND_ENUMERATION_CAP });
    }
    let probabilities = match design {
        Design::Bernoulli { probabilities } => probabilities,
        _ => {
            return Err(Error::InvalidParameter(
                "effects_enumeration requires a Bernoulli design".into(),
            ))
        }
    };
    design.validate_for(n)?;
    let mut tau_d = 0.0;
    let mut tau_i = 0.0;
    // For each unit i, average the flip effect over all assignments of the
    // other units, weighted by their design probabilities. The flip effect
    // itself never reads x_i, so we enumerate full vectors with x_i pinned.
    for i in 0..n {
        for mut x in enumerate_assignments(n - 1)? {
            x.insert(i, 0);
            let w = bernoulli_weight_excluding(probabilities, &x, i);
            let flip = model.flip_effect(&x, i)?;
            tau_d += w * flip[i];
            tau_i += w * (flip.sum() - flip[i]);
        }
    }
    tau_d /= n as f64;
    tau_i /= n as f64;
    Ok(EffectDecomposition {
        direct: EffectEstimate::exact(EstimandKind::Direct, tau_d, Method::Enumeration),
        indirect: EffectEstimate::exact(EstimandKind::Indirect, tau_i, Method::Enumeration),
        total: EffectEstimate::exact(EstimandKind::Total, tau_d + tau_i, Method::Enumeration),
    })
}

/// Monte Carlo direct/indirect/total effects over `replications` sampled
/// assignments; each replicate computes all `N` flip effects (one cached-
/// factor solve per unit for the random-field model).
///
/// Replicates run in parallel with per-replicate seeds derived from the
/// passed RNG, so the result is independent of thread count.
pub fn effects_monte_carlo(
    model: &dyn OutcomeModel,
    design: &Design,
    replications: usize,
    rng: &mut Rng,
) -> Result<EffectDecomposition> {
    let n = model.n();
    if replications < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 replications".into()));
    }
    design.validate_for(n)?;
    let master: u64 = rng.gen();
    let per_replicate: Vec<(f64, f64)> = (0..replications)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let mut rng = replicate_rng(master, r as u64);
            let x = crate::design::sample_assignment(design, n, &mut rng)?;
            let mut t_d = 0.0;
            let mut t_i = 0.0;
            for i in 0..n {
                let flip = model.flip_effect(&x, i)?;
                t_d += flip[i];
                t_i += flip.sum() - flip[i];
            }
            Ok((t_d / n as f64, t_i / n as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    // Reduce sequentially in replicate order for bit-stable results.
    let rf = replications as f64;
    let mean_d = per_replicate.iter().map(|p| p.0).sum::<f64>() / rf;
    let mean_i = per_replicate.iter().map(|p| p.1).sum::<f64>() / rf;
    let mean_t = mean_d + mean_i;
    let (mut v_d, mut v_i, mut v_t) = (0.0, 0.0, 0.0);
    for &(d, i) in &per_replicate {
        v_d += (d - mean_d).powi(2);
        v_i += (i - mean_i).powi(2);
        v_t += (d + i - mean_t).powi(2);
    }
    let se = |v: f64| (v / (rf - 1.0) / rf).sqrt();
    Ok(EffectDecomposition {
        direct: EffectEstimate::monte_carlo(EstimandKind::Direct, mean_d, se(v_d), replications),
        indirect: EffectEstimate::monte_carlo(EstimandKind::Indirect, mean_i, se(v_i), replications),
        total: EffectEstimate::monte_carlo(EstimandKind::Total, mean_t, se(v_t), replications),
    })
}

/// Finite-`N` spillover scalar `a(δ) = δ·(1ᵀα)(‖α‖₂² I_K − δ αᵀα)^{-1}(αᵀ1)/N`
/// for latent positions `α` (`n×k`), with `‖α‖₂` the spectral norm of `α`.
pub fn a_of_delta(positions: &DMatrix<f64>, delta: f64) -> Result<f64> {
    let (n, k) = positions.shape();
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("positions matrix must be nonempty".into()));
    }
    if delta.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!("delta = {delta} must satisfy |delta| < 1")));
    }
    let gram = positions.transpose() * positions;
    let spectral_sq = nalgebra::SymmetricEigen::new(gram.clone()).eigenvalues.max();
    let inner = DMatrix::<f64>::identity(k, k).scale(spectral_sq) - gram.scale(delta);
    let s = positions.transpose() * DVector::from_element(n, 1.0);
    let solved = inner.clone().cholesky().map(|c| c.solve(&s)).ok_or_else(|| {
        Error::SolveFailure("inner matrix of a(delta) is singular (zero positions?)".into())
    })?;
    Ok(delta * s.dot(&solved) / n as f64)
}

/// Closed-form large-graph effects: `τ_D = β`, `τ_I = γ + (β+γ)·a`,
/// `τ_T = (β+γ)(1+a)` with `a = a_of_delta(positions, δ)`.
pub fn theorem2_effects(
    beta: f64,
    gamma: f64,
    delta: f64,
    positions: &DMatrix<f64>,
) -> Result<EffectDecomposition> {
    let a = a_of_delta(positions, delta)?;
    let exact = |kind, value| EffectEstimate::exact(kind, value, Method::ClosedForm);
    Ok(EffectDecomposition {
        direct: exact(EstimandKind::Direct, beta),
        indirect: exact(EstimandKind::Indirect, gamma + (beta + gamma) * a),
        total: exact(EstimandKind::Total, (beta + gamma) * (1.0 + a)),
    })
}

/// Result of the sensitivity-identity check.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityCheck {
    /// `τ_T` from exact enumeration under Bernoulli(π).
    pub lhs: f64,
    /// `(1/N) Σ_i Σ_j ∂ E_X Y_i / ∂π_j` by central finite differences.
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub gap: f64,
}

/// Verifies the sensitivity identity: under a Bernoulli(π) design, the total
/// effect equals the summed sensitivities of expected outcomes to the
/// assignment probabilities. The right-hand side differentiates the exact
/// polynomial `g(π) = Σ_i E_X Y_i` (computed by enumeration, with model means
/// cached across perturbations) via central differences with step `h`.
pub fn theorem1_check(
    model: &dyn OutcomeModel,
    pi: &[f64],
    h: f64,
) -> Result<SensitivityCheck> {
    let n = model.n();
    if n > ESTIMAND_ENUMERATION_CAP {
        return Err(Error::EnumerationCap { requested: n, cap: ESTIMAND_ENUMERATION_CAP });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let design = Design::bernoulli(pi.to_vec())?;
    let lhs = effects_enumeration(model, &design)?.total.value;

    // Cache Σ_i μ_i(x) for every assignment; g(π) re-weights these sums.
    let assignments = enumerate_assignments(n)?;
    let mean_sums: Vec<f64> =
        assignments.iter().map(|x| model.mean(x).map(|m| m.sum())).collect::<Result<_>>()?;
    let g = |pi_shifted: &[f64]| -> f64 {
        assignments
            .iter()
            .zip(&mean_sums)
            .map(|(x, s)| {
                let w: f64 = x
                    .iter()
                    .zip(pi_shifted)
                    .map(|(&xj, &pj)| if xj == 1 { pj } else { 1.0 - pj })
                    .product();
                w * s
            })
            .sum()
    };
    let mut rhs = 0.0;
    let mut shifted = pi.to_vec();
    for j in 0..n {
        shifted[j] = pi[j] + h;
        let up = g(&shifted);
        shifted[j] = pi[j] - h;
        let down = g(&shifted);
        shifted[j] = pi[j];
        rhs += (up - down) / (2.0 * h);
    }
    rhs /= n as f64;
    Ok(SensitivityCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Average expected outcome `(1/N) Σ_i E Y_i(x)` under assignment `x`.
pub fn welfare(model: &dyn OutcomeModel, x: &[u8]) -> Result<EffectEstimate> {
    let value = model.mean(x)?.mean();
    Ok(EffectEstimate::exact(EstimandKind::Welfare, value, Method::ClosedForm))
}

/// Search strategy for welfare-optimal assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Full enumeration (`n ≤ 20`), ties broken by lexicographic order.
    Exhaustive,
    /// Steepest-ascent coordinate search from the all-control assignment.
    Greedy,
}

/// Finds a welfare-maximizing assignment, optionally under a treated-count
/// budget (`Σ x_i ≤ budget`).
///
/// Exhaustive search returns the global maximizer over the feasible set,
/// breaking ties toward the lexicographically smallest assignment. Greedy
/// coordinate ascent starts from `0_N` and repeatedly takes the single flip
/// (adding a unit only while under budget) that most improves welfare,
/// stopping at a local maximum; its welfare never exceeds the exhaustive
/// optimum.
pub fn optimize_assignment(
    model: &dyn OutcomeModel,
    method: SearchMethod,
    budget: Option<usize>,
) -> Result<(Vec<u8>, f64)> {
    let n = model.n();
    match method {
        SearchMethod::Exhaustive => {
            if n > SEARCH_ENUMERATION_CAP {
                return Err(Error::EnumerationCap { requested: n, cap: SEARCH_ENUMERATION_CAP });
            }
            let mut best: Option<(Vec<u8>, f64)> = None;
            for x in enumerate_assignments(n)? {
                if let Some(b) = budget {
                    if x.iter().map(|&v| usize::from(v)).sum::<usize>() > b {
                        continue;
                    }
                }
                let w = welfare(model, &x)?.value;
                // Strict improvement keeps the first (lexicographically
                // smallest) maximizer.
                if best.as_ref().map_or(true, |(_, bw)| w > *bw) {
                    best = Some((x, w));
                }
            }
            best.ok_or_else(|| Error::InvalidParameter("empty feasible set".into()))
        }
        SearchMethod::Greedy => {
            let mut x = vec![0u8; n];
            let mut current = welfare(model, &x)?.value;
            loop {
                let treated: usize = x.iter().map(|&v| usize::from(v)).sum();
                let mut best_flip: Option<(usize, f64)> = None;
                for i in 0..n {
                    if x[i] == 0 && budget.is_some_and(|b| treated >= b) {
                        continue;
                    }
                    x[i] ^= 1;
                    let w = welfare(model, &x)?.value;
                    x[i] ^= 1;
                    if w > current && best_flip.map_or(true, |(_, bw)| w > bw) {
                        best_flip = Some((i, w));
                    }
                }
                match best_flip {
                    Some((i, w)) => {
                        x[i] ^= 1;
                        current = w;
                    }
                    None => return Ok((x, current)),
                }
            }
        }
    }
}
