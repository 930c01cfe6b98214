//! Potential-outcome generators.
//!
//! Two models are implemented:
//!
//! * **Fixed linear exposure model** — deterministic outcomes
//!   `Y_i = α + β x_i + γ · (treated fraction of i's neighborhood)`.
//! * **Gaussian Markov random field (GMRF)** — outcomes with both treatment
//!   spillover (`γ`) and outcome spillover (`δ`), specified through conditional
//!   means `E[Y_i | x, y_{−i}] = β(1+ε u_i) x_i + γ (W₁x)_i + δ (Wy)_i`, where
//!   `W₁` and `W` carry the treatment- and outcome-spillover scalings of the
//!   configured [`Scaling`] rule, and the conditional variance is `σ²/d_i`
//!   under degree scaling (`σ²` under the constant-scaled rules). These
//!   conditionals are mutually consistent with one joint Gaussian: writing
//!   `D_w` for the diagonal of degrees (isolated units set to 1) under degree
//!   scaling, or the identity otherwise, the joint law has mean `μ` solving
//!   `(I − δW)μ = b(x)` with `b(x) = β(1+εu)∘x + γW₁x` and symmetric
//!   precision `Q = D_w(I − δW)/σ²`, where `W = D_w^{-1} Z_w` and `Z_w` is
//!   the adjacency (degree scaling) or `c·Z` (constant-scaled rules).
//!
//! Both models expose the [`OutcomeModel`] evaluator interface used by the
//! estimand calculators: mean outcomes under an assignment, plus the effect of
//! flipping one unit's treatment. For the GMRF the flip effect reuses a cached
//! factorization — one solve per flip instead of two fresh mean evaluations —
//! which is what makes the Monte Carlo effect estimators affordable.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::seed::Rng;

/// Relative residual tolerance for the GMRF mean solve.
const SOLVE_TOLERANCE: f64 = 1e-10;

/// Neighborhood scaling rule for the GMRF spillover terms.
///
/// The conditional mean has two spillover sums — the treatment-spillover term
/// `γ c_{i,1} Σ_j x_j z_{ij}` and the outcome-spillover term
/// `δ c_{i,2} Σ_j y_j z_{ij}` — and the rule fixes both scalings:
///
/// * [`Scaling::Degree`] — `c_{i,1} = c_{i,2} = 1/degree_i` (both sums are
///   neighborhood averages; rows of isolated units are all zero).
/// * [`Scaling::Constant`] — `c_{i,1} = c_{i,2} = c` for a shared `c > 0`.
/// * [`Scaling::DegreeConstant`] — treatment spillover stays a neighborhood
///   average (`c_{i,1} = 1/degree_i`) while outcome spillover uses a shared
///   constant (`c_{i,2} = c`). With `c = 1/‖α‖₂²` for a rank-1 random dot
///   product graph with positions `α`, this is the regime in which the
///   closed-form effect decomposition `τ_D = β`, `τ_I = γ + (β+γ)a(δ)`
///   holds, because the outcome-spillover resolvent `(I − δcZ)^{-1}` then
///   produces the geometric factor `a(δ)` while the treatment-spillover
///   average contributes `γ` exactly.
/// * [`Scaling::RawConstant`] — unscaled treatment spillover (`c_{i,1} = 1`:
///   the `γ` term multiplies the raw treated-neighbor count) with
///   constant-scaled outcome spillover `c_{i,2} = c`. The raw count makes the
///   treatment-spillover signal grow with degree instead of averaging out,
///   which is what lets conditional randomization tests see it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// `c_{i,1} = c_{i,2} = 1/degree_i` (rows of isolated units are all zero).
    Degree,
    /// A single constant `c > 0` shared by every unit and both terms.
    Constant(f64),
    /// Degree-averaged treatment spillover with constant-scaled outcome
    /// spillover `c_{i,2} = c`.
    DegreeConstant(f64),
    /// Raw-count treatment spillover (`c_{i,1} = 1`) with constant-scaled
    /// outcome spillover `c_{i,2} = c`.
    RawConstant(f64),
}

/// Optional own-treatment boost `β(1 + ε u_i) x_i` for marked units.
#[derive(Debug, Clone, PartialEq)]
pub struct Boost {
    epsilon: f64,
    indicator: Vec<u8>,
}

impl Boost {
    /// Boost factor `ε` with a binary marker vector `u`.
    pub fn new(epsilon: f64, indicator: Vec<u8>) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("boost epsilon {epsilon} must be finite")));
        }
        if let Some(i) = indicator.iter().position(|&u| u > 1) {
            return Err(Error::InvalidParameter(format!(
                "boost indicator entry {i} is {}; entries must be 0 or 1",
                indicator[i]
            )));
        }
        Ok(Self { epsilon, indicator })
    }

    /// Boost factor `ε`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Marker vector `u`.
    pub fn indicator(&self) -> &[u8] {
        &self.indicator
    }
}

/// GMRF parameters: coefficients, noise scale, scaling rule, optional boost.
#[derive(Debug, Clone, PartialEq)]
pub struct GmrfParams {
    beta: f64,
    gamma: f64,
    delta: f64,
    sigma2: f64,
    scaling: Scaling,
    boost: Option<Boost>,
}

impl GmrfParams {
    /// Validates `|δ| < 1` and `σ² > 0`; degree scaling, no boost.
    pub fn new(beta: f64, gamma: f64, delta: f64, sigma2: f64) -> Result<Self> {
        if ![beta, gamma, delta, sigma2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("GMRF coefficients must be finite".into()));
        }
        if delta.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "outcome-spillover delta = {delta} must satisfy |delta| < 1"
            )));
        }
        if sigma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma2 = {sigma2} must be positive")));
        }
        Ok(Self { beta, gamma, delta, sigma2, scaling: Scaling::Degree, boost: None })
    }

    /// Replaces the scaling rule (constant scalings require `c > 0`).
    pub fn with_scaling(mut self, scaling: Scaling) -> Result<Self> {
        if let Scaling::Constant(c) | Scaling::DegreeConstant(c) | Scaling::RawConstant(c) = scaling
        {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "constant scaling c = {c} must be positive and finite"
                )));
            }
        }
        self.scaling = scaling;
        Ok(self)
    }

    /// Enables the own-treatment boost.
    pub fn with_boost(mut self, boost: Boost) -> Self {
        self.boost = Some(boost);
        self
    }

    /// Treatment coefficient `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Treatment-spillover coefficient `γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Outcome-spillover coefficient `δ`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Noise scale `σ²`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Scaling rule.
    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    /// Optional boost.
    pub fn boost(&self) -> Option<&Boost> {
        self.boost.as_ref()
    }

    /// Effective own-treatment coefficient `β(1 + ε u_i)` for unit `i`.
    fn beta_for(&self, i: usize) -> f64 {
        match &self.boost {
            Some(b) if b.indicator[i] == 1 => self.beta * (1.0 + b.epsilon),
            _ => self.beta,
        }
    }
}

/// Fixed (noise-free) linear exposure model `Y_i = α + βx_i + γ·fraction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedLinearModel {
    /// Intercept `α`.
    pub alpha: f64,
    /// Own-treatment coefficient `β`.
    pub beta: f64,
    /// Treated-neighbor-fraction coefficient `γ`.
    pub gamma: f64,
}

impl FixedLinearModel {
    /// Validates finiteness of all three coefficients.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if ![alpha, beta, gamma].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("fixed model coefficients must be finite".into()));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

/// Deterministic outcomes of the fixed linear model under assignment `x`.
///
/// The treated fraction of an empty neighborhood is defined as 0.
pub fn fixed_linear_outcome(
    model: &FixedLinearModel,
    graph: &InterferenceGraph,
    x: &[u8],
) -> Result<DVector<f64>> {
    crate::design::validate_assignment(x, graph.n())?;
    let y = DVector::from_fn(graph.n(), |i, _| {
        let degree = graph.degree(i);
        let fraction = if degree == 0 {
            0.0
        } else {
            graph.neighbors(i).iter().map(|&j| f64::from(x[j])).sum::<f64>() / degree as f64
        };
        model.alpha + model.beta * f64::from(x[i]) + model.gamma * fraction
    });
    Ok(y)
}

/// Evaluator interface consumed by the estimand calculators: expected
/// outcomes under an assignment and single-unit flip effects.
pub trait OutcomeModel: Sync {
    /// Number of units.
    fn n(&self) -> usize;

    /// Expected outcome vector `E[Y(x)]`.
    fn mean(&self, x: &[u8]) -> Result<DVector<f64>>;

    /// `E[Y(x_i=1, x_{−i})] − E[Y(x_i=0, x_{−i})]`, the effect of flipping
    /// unit `i`'s treatment with everyone else held at `x`.
    fn flip_effect(&self, x: &[u8], i: usize) -> Result<DVector<f64>> {
        let mut up = x.to_vec();
        up[i] = 1;
        let mut down = up.clone();
        down[i] = 0;
        Ok(self.mean(&up)? - self.mean(&down)?)
    }
}

/// The fixed linear model bound to a graph.
pub struct FixedLinearOutcome<'g> {
    model: FixedLinearModel,
    graph: &'g InterferenceGraph,
}

impl<'g> FixedLinearOutcome<'g> {
    /// Binds the model to `graph`.
    pub fn new(model: FixedLinearModel, graph: &'g InterferenceGraph) -> Self {
        Self { model, graph }
    }
}

impl OutcomeModel for FixedLinearOutcome<'_> {
    fn n(&self) -> usize {
        self.graph.n()
    }

    fn mean(&self, x: &[u8]) -> Result<DVector<f64>> {
        fixed_linear_outcome(&self.model, self.graph, x)
    }
}

/// GMRF evaluator with a cached symmetric factorization.
///
/// Construction factorizes `K = D_w − δ Z_w = σ² Q` once; means, samples,
/// log-likelihoods, and flip effects all reuse the factor. The struct is
/// immutable and safe to share across parallel workers.
pub struct GmrfModel<'g> {
    params: GmrfParams,
    graph: &'g InterferenceGraph,
    /// Diagonal `D_w` (degrees with isolated units set to 1, or identity).
    dw: DVector<f64>,
    /// Outcome-spillover scaling `c_{i,2}` so that `W_{ij} = c_{i,2} z_{ij}`.
    c: DVector<f64>,
    /// Treatment-spillover scaling `c_{i,1}` for the offset's `γ` term.
    c_treat: DVector<f64>,
    /// Cholesky factor of `K = D_w − δ Z_w` (positive definite for `|δ|<1`
    /// under degree scaling; under constant scaling positive definiteness is
    /// checked by the factorization itself).
    chol: Cholesky<f64, Dyn>,
    /// `log det K`, from the factor diagonal.
    log_det_k: f64,
}

impl<'g> GmrfModel<'g> {
    /// Builds the evaluator, validating the boost length and factorizing the
    /// precision kernel.
    pub fn new(params: GmrfParams, graph: &'g InterferenceGraph) -> Result<Self> {
        let n = graph.n();
        if let Some(boost) = &params.boost {
            if boost.indicator.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "boost indicator has length {} for n = {n}",
                    boost.indicator.len()
                )));
            }
        }
        let inverse_degree = DVector::from_fn(n, |i, _| {
            let d = graph.degree(i);
            if d == 0 {
                0.0
            } else {
                1.0 / d as f64
            }
        });
        let (dw, c, c_treat): (DVector<f64>, DVector<f64>, DVector<f64>) = match params.scaling {
            Scaling::Degree => {
                let dw = DVector::from_fn(n, |i, _| (graph.degree(i).max(1)) as f64);
                (dw, inverse_degree.clone(), inverse_degree)
            }
            Scaling::Constant(cval) => (
                DVector::from_element(n, 1.0),
                DVector::from_element(n, cval),
                DVector::from_element(n, cval),
            ),
            Scaling::DegreeConstant(cval) => (
                DVector::from_element(n, 1.0),
                DVector::from_element(n, cval),
                inverse_degree,
            ),
            Scaling::RawConstant(cval) => (
                DVector::from_element(n, 1.0),
                DVector::from_element(n, cval),
                DVector::from_element(n, 1.0),
            ),
        };
        // K = D_w − δ Z_w where Z_w = D_w W is symmetric (adjacency under
        // degree scaling, c·adjacency under the constant-scaled rules).
        let mut k = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = dw[i];
            let scale = match params.scaling {
                Scaling::Degree => 1.0,
                Scaling::Constant(cval)
                | Scaling::DegreeConstant(cval)
                | Scaling::RawConstant(cval) => cval,
            };
            for &j in graph.neighbors(i) {
                k[(i, j)] = -params.delta * scale;
            }
        }
        let chol = k.cholesky().ok_or_else(|| {
            Error::SolveFailure(
                "precision kernel is not positive definite for these parameters".into(),
            )
        })?;
        let log_det_k = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Self { params, graph, dw, c, c_treat, chol, log_det_k })
    }

    /// Model parameters.
    pub fn params(&self) -> &GmrfParams {
        &self.params
    }

    /// The graph this evaluator is bound to.
    pub fn graph(&self) -> &InterferenceGraph {
        self.graph
    }

    /// Outcome-spillover product `W v` via neighbor sums (no dense multiply).
    fn w_times(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.graph.n(), |i, _| {
            if self.c[i] == 0.0 {
                0.0
            } else {
                self.c[i] * self.graph.neighbors(i).iter().map(|&j| v[j]).sum::<f64>()
            }
        })
    }

    /// Treatment-spillover product `W₁ v` using the `c_{i,1}` scaling.
    fn w_treat_times(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.graph.n(), |i, _| {
            if self.c_treat[i] == 0.0 {
                0.0
            } else {
                self.c_treat[i] * self.graph.neighbors(i).iter().map(|&j| v[j]).sum::<f64>()
            }
        })
    }

    /// Conditional-mean offset `b(x)` with `b_i = β(1+εu_i)x_i + γ(W₁x)_i`.
    pub fn offset(&self, x: &[u8]) -> Result<DVector<f64>> {
        crate::design::validate_assignment(x, self.graph.n())?;
        let xv = DVector::from_fn(self.graph.n(), |i, _| f64::from(x[i]));
        let wx = self.w_treat_times(&xv);
        Ok(DVector::from_fn(self.graph.n(), |i, _| {
            self.params.beta_for(i) * xv[i] + self.params.gamma * wx[i]
        }))
    }

    /// Solves `(I − δW)μ = b` through the symmetric kernel: `K μ = D_w b`.
    fn solve_mean_system(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let rhs = b.component_mul(&self.dw);
        let mut mu = self.chol.solve(&rhs);
        let tolerance = SOLVE_TOLERANCE * (1.0 + b.amax());
        for _ in 0..2 {
            let residual = &mu - self.params.delta * self.w_times(&mu) - b;
            if residual.amax() <= tolerance {
                return Ok(mu);
            }
            // One step of iterative refinement in the symmetric metric.
            mu += self.chol.solve(&residual.component_mul(&self.dw).scale(-1.0));
        }
        let residual = (&mu - self.params.delta * self.w_times(&mu) - b).amax();
        Err(Error::SolveFailure(format!(
            "mean solve residual {residual:e} exceeds tolerance {tolerance:e}"
        )))
    }

    /// Joint mean `μ(x)`.
    pub fn mean_vector(&self, x: &[u8]) -> Result<DVector<f64>> {
        let b = self.offset(x)?;
        self.solve_mean_system(&b)
    }

    /// Truncated series `Σ_{d=0}^{d_max} (δW)^d b(x)`.
    ///
    /// Converges geometrically to the mean whenever `|δ|` times the spectral
    /// bound of `W` is below 1 (always true under degree scaling).
    pub fn mean_series(&self, x: &[u8], d_max: usize) -> Result<DVector<f64>> {
        let b = self.offset(x)?;
        let mut acc = b.clone();
        let mut term = b;
        for _ in 0..d_max {
            term = self.w_times(&term).scale(self.params.delta);
            acc += &term;
        }
        Ok(acc)
    }

    /// One joint draw `y ~ N(μ(x), Q^{-1})` via the cached factor: with
    /// `K = LLᵀ`, solving `Lᵀ v = z` for standard-normal `z` gives covariance
    /// `K^{-1}`, and `y = μ + σ v`.
    pub fn sample(&self, x: &[u8], rng: &mut Rng) -> Result<DVector<f64>> {
        let mu = self.mean_vector(x)?;
        let z = DVector::from_fn(self.graph.n(), |_, _| rand::Rng::sample(rng, StandardNormal));
        let v = self
            .chol
            .l_dirty()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::SolveFailure("triangular solve failed in sampler".into()))?;
        Ok(mu + v.scale(self.params.sigma2.sqrt()))
    }

    /// Gaussian log-density of `y` given `x`:
    /// `½ log det Q − ½ (y−μ)ᵀ Q (y−μ) − (n/2) log 2π`.
    pub fn loglik(&self, x: &[u8], y: &DVector<f64>) -> Result<f64> {
        let n = self.graph.n();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "outcome vector has length {} for n = {n}",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("outcome vector has non-finite entries".into()));
        }
        let mu = self.mean_vector(x)?;
        let r = y - mu;
        // (y−μ)ᵀ K (y−μ) with K applied through neighbor sums.
        let kr = r.component_mul(&self.dw) - self.w_times(&r).component_mul(&self.dw) .scale(self.params.delta);
        let quad = r.dot(&kr) / self.params.sigma2;
        let log_det_q = self.log_det_k - n as f64 * self.params.sigma2.ln();
        Ok(0.5 * log_det_q - 0.5 * quad - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
    }

    /// Exact covariance `Q^{-1}` (dense inverse; test/diagnostic use).
    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.inverse().scale(self.params.sigma2)
    }
}

impl OutcomeModel for GmrfModel<'_> {
    fn n(&self) -> usize {
        self.graph.n()
    }

    fn mean(&self, x: &[u8]) -> Result<DVector<f64>> {
        self.mean_vector(x)
    }

    /// Flip identity: changing `x_i` from 0 to 1 changes `b` by
    /// `β(1+εu_i) e_i + γ W e_i`, so the mean changes by the solve of that
    /// right-hand side — one cheap solve against the cached factor, and the
    /// result does not depend on the rest of `x` (the model is linear in
    /// treatments).
    fn flip_effect(&self, x: &[u8], i: usize) -> Result<DVector<f64>> {
        crate::design::validate_assignment(x, self.graph.n())?;
        let n = self.graph.n();
        if i >= n {
            return Err(Error::InvalidParameter(format!("flip unit {i} out of range for n = {n}")));
        }
        // D_w (β' e_i + γ W₁ e_i): the offset change from flipping x_i is
        // β' e_i plus γ c_{j,1} at each neighbor j, premultiplied by D_w.
        let mut rhs = DVector::zeros(n);
        rhs[i] = self.params.beta_for(i) * self.dw[i];
        for &j in self.graph.neighbors(i) {
            rhs[j] += self.params.gamma * self.dw[j] * self.c_treat[j];
        }
        Ok(self.chol.solve(&rhs))
    }
}

/// Conditional mean vector `μ(x)` (convenience wrapper over [`GmrfModel`]).
pub fn gmrf_mean(params: &GmrfParams, graph: &InterferenceGraph, x: &[u8]) -> Result<DVector<f64>> {
    GmrfModel::new(params.clone(), graph)?.mean_vector(x)
}

/// One joint draw from the GMRF (convenience wrapper).
pub fn gmrf_sample(
    params: &GmrfParams,
    graph: &InterferenceGraph,
    x: &[u8],
    rng: &mut Rng,
) -> Result<DVector<f64>> {
    GmrfModel::new(params.clone(), graph)?.sample(x, rng)
}

/// Truncated path series for the mean (convenience wrapper).
pub fn gmrf_mean_series(
    params: &GmrfParams,
    graph: &InterferenceGraph,
    x: &[u8],
    d_max: usize,
) -> Result<DVector<f64>> {
    GmrfModel::new(params.clone(), graph)?.mean_series(x, d_max)
}

/// Gaussian log-likelihood of `y` given `x` (convenience wrapper).
pub fn gmrf_loglik(
    params: &GmrfParams,
    graph: &InterferenceGraph,
    x: &[u8],
    y: &DVector<f64>,
) -> Result<f64> {
    GmrfModel::new(params.clone(), graph)?.loglik(x, y)
}
