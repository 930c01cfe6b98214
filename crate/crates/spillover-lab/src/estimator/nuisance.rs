//! Nuisance models for the doubly robust estimator: a multinomial logistic
//! propensity for the exposure level given confounders, and a per-level
//! least-squares outcome regression.

use nalgebra::{DMatrix, DVector};

use super::ExposureLevel;
use crate::error::{Error, Result};

/// An `n × p` confounder matrix (row per unit). `p = 0` is allowed and means
/// "no confounders".
#[derive(Debug, Clone)]
pub struct ConfounderMatrix {
    n: usize,
    p: usize,
    /// Row-major storage.
    data: Vec<f64>,
}

impl ConfounderMatrix {
    /// Builds from row-major data; every entry must be finite.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "confounder data has {} entries, expected {n}×{p} = {}",
                data.len(),
                n * p
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("confounder entries must be finite".into()));
        }
        Ok(Self { n, p, data })
    }

    /// A confounder-free matrix for `n` units.
    pub fn empty(n: usize) -> Self {
        Self { n, p: 0, data: Vec::new() }
    }

    /// Number of units.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of confounders.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Confounder row for unit `i` (empty slice when `p = 0`).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }
}

fn sorted_levels(exposures: &[ExposureLevel]) -> Vec<ExposureLevel> {
    let mut levels: Vec<ExposureLevel> = exposures.to_vec();
    levels.sort();
    levels.dedup();
    levels
}

/// Fitted propensity model `ψ̂(d; c) = P(exposure = d | confounders = c)`.
#[derive(Debug, Clone)]
pub struct PropensityFit {
    levels: Vec<ExposureLevel>,
    kind: PropensityKind,
}

#[derive(Debug, Clone)]
enum PropensityKind {
    /// No confounders: the empirical level frequencies.
    Frequency(Vec<f64>),
    /// Multinomial logistic coefficients, one `(1+p)`-row per non-reference
    /// level (the first level is the reference with linear predictor 0).
    Logistic(DMatrix<f64>),
}

impl PropensityFit {
    /// The fitted level set, sorted.
    pub fn levels(&self) -> &[ExposureLevel] {
        &self.levels
    }

    /// Evaluates `ψ̂(level; c)`. Levels never seen in fitting get 0.
    pub fn predict(&self, level: &ExposureLevel, c: &[f64]) -> f64 {
        let Some(idx) = self.levels.iter().position(|l| l == level) else {
            return 0.0;
        };
        match &self.kind {
            PropensityKind::Frequency(freq) => freq[idx],
            PropensityKind::Logistic(coef) => {
                // Linear predictors with the reference pinned at 0, then a
                // shifted softmax for numerical safety.
                let mut eta = vec![0.0];
                for k in 0..coef.nrows() {
                    let mut v = coef[(k, 0)];
                    for (j, &cj) in c.iter().enumerate() {
                        v += coef[(k, j + 1)] * cj;
                    }
                    eta.push(v);
                }
                let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
                exps[idx] / exps.iter().sum::<f64>()
            }
        }
    }

    /// Closure form of [`Self::predict`] for use with
    /// [`super::dr_exposure_mean`].
    pub fn predictor(&self) -> impl Fn(&ExposureLevel, &[f64]) -> f64 + '_ {
        move |level, c| self.predict(level, c)
    }
}

/// Fits the exposure-level propensity given confounders.
///
/// With no confounders this is the frequency table of levels. Otherwise a
/// multinomial logistic model (first level as reference) is maximized by
/// Newton iteration with step halving; separation or a degenerate design
/// matrix is reported as a fit failure.
pub fn fit_propensity(
    exposures: &[ExposureLevel],
    confounders: &ConfounderMatrix,
) -> Result<PropensityFit> {
    let n = exposures.len();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot fit a propensity on zero units".into()));
    }
    if confounders.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} exposures but {} confounder rows",
            confounders.n()
        )));
    }
    let levels = sorted_levels(exposures);
    let k_levels = levels.len();
    let class: Vec<usize> = exposures
        .iter()
        .map(|e| levels.iter().position(|l| l == e).unwrap())
        .collect();
    let p = confounders.p();
    if p == 0 || k_levels == 1 {
        let mut freq = vec![0.0; k_levels];
        for &c in &class {
            freq[c] += 1.0;
        }
        for f in &mut freq {
            *f /= n as f64;
        }
        return Ok(PropensityFit { levels, kind: PropensityKind::Frequency(freq) });
    }

    // Newton-Raphson on the multinomial log-likelihood. Parameters are the
    // (K−1)×(1+p) non-reference coefficient rows, flattened row-major.
    let q = (k_levels - 1) * (1 + p);
    let mut theta = DVector::<f64>::zeros(q);
    let z_row = |i: usize| -> Vec<f64> {
        let mut z = Vec::with_capacity(1 + p);
        z.push(1.0);
        z.extend_from_slice(confounders.row(i));
        z
    };
    let probs_at = |theta: &DVector<f64>, z: &[f64]| -> Vec<f64> {
        let mut eta = vec![0.0; k_levels];
        for k in 1..k_levels {
            let base = (k - 1) * (1 + p);
            eta[k] = (0..=p).map(|j| theta[base + j] * z[j]).sum();
        }
        let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    };
    let loglik_at = |theta: &DVector<f64>| -> f64 {
        (0..n).map(|i| probs_at(theta, &z_row(i))[class[i]].max(1e-300).ln()).sum()
    };

    let mut loglik = loglik_at(&theta);
    for _iter in 0..100 {
        let mut score = DVector::<f64>::zeros(q);
        let mut info = DMatrix::<f64>::zeros(q, q);
        for i in 0..n {
            let z = z_row(i);
            let probs = probs_at(&theta, &z);
            for k in 1..k_levels {
                let rk = (k - 1) * (1 + p);
                let resid = f64::from(u8::from(class[i] == k)) - probs[k];
                for j in 0..=p {
                    score[rk + j] += resid * z[j];
                }
                for l in 1..k_levels {
                    let rl = (l - 1) * (1 + p);
                    let w = probs[k] * (f64::from(u8::from(k == l)) - probs[l]);
                    for j in 0..=p {
                        for m in 0..=p {
                            info[(rk + j, rl + m)] += w * z[j] * z[m];
                        }
                    }
                }
            }
        }
        if score.amax() < 1e-8 {
            // Perfect classification means the likelihood has no finite
            // maximizer — the converged point is a separation artifact.
            let separated = (0..n).all(|i| probs_at(&theta, &z_row(i))[class[i]] > 1.0 - 1e-6);
            if separated {
                return Err(Error::FitFailure(
                    "exposure levels are perfectly separated by the confounders; the propensity MLE does not exist"
                        .into(),
                ));
            }
            let coef = DMatrix::from_fn(k_levels - 1, 1 + p, |k, j| theta[k * (1 + p) + j]);
            return Ok(PropensityFit { levels, kind: PropensityKind::Logistic(coef) });
        }
        let step = info.cholesky().map(|c| c.solve(&score)).ok_or_else(|| {
            Error::FitFailure(
                "propensity information matrix is singular (degenerate confounders or separation)"
                    .into(),
            )
        })?;
        // Step halving keeps the likelihood non-decreasing.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &theta + step.scale(scale);
            let cand_ll = loglik_at(&candidate);
            if cand_ll >= loglik - 1e-12 {
                theta = candidate;
                loglik = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::FitFailure("propensity Newton step failed to improve".into()));
        }
        if theta.amax() > 30.0 {
            return Err(Error::FitFailure(
                "propensity coefficients diverged; the exposure levels are separated by the confounders"
                    .into(),
            ));
        }
    }
    Err(Error::FitFailure("propensity fit did not converge in 100 iterations".into()))
}

/// Fitted outcome regression `m̂(d; c)`: separate intercept and slopes per
/// exposure level (least squares on level indicators interacted with
/// confounders).
#[derive(Debug, Clone)]
pub struct RegressionFit {
    levels: Vec<ExposureLevel>,
    p: usize,
    /// Flattened `(1+p)` coefficients per level.
    coef: DVector<f64>,
}

impl RegressionFit {
    /// The fitted level set, sorted.
    pub fn levels(&self) -> &[ExposureLevel] {
        &self.levels
    }

    /// Evaluates `m̂(level; c)`; `NaN` for levels never seen in fitting
    /// (turned into a hard error by the doubly robust estimator).
    pub fn predict(&self, level: &ExposureLevel, c: &[f64]) -> f64 {
        let Some(idx) = self.levels.iter().position(|l| l == level) else {
            return f64::NAN;
        };
        let base = idx * (1 + self.p);
        let mut v = self.coef[base];
        for (j, &cj) in c.iter().enumerate() {
            v += self.coef[base + 1 + j] * cj;
        }
        v
    }

    /// Closure form of [`Self::predict`] for use with
    /// [`super::dr_exposure_mean`].
    pub fn predictor(&self) -> impl Fn(&ExposureLevel, &[f64]) -> f64 + '_ {
        move |level, c| self.predict(level, c)
    }
}

/// Least-squares fit of `y` on exposure-level indicators interacted with the
/// confounders, giving one linear model per observed level.
pub fn fit_outcome_regression(
    y: &[f64],
    exposures: &[ExposureLevel],
    confounders: &ConfounderMatrix,
) -> Result<RegressionFit> {
    let n = y.len();
    if exposures.len() != n || confounders.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "y, exposures, confounders must share a length (got {n}, {}, {})",
            exposures.len(),
            confounders.n()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("outcomes must be finite".into()));
    }
    let levels = sorted_levels(exposures);
    let p = confounders.p();
    let cols = levels.len() * (1 + p);
    let mut design = DMatrix::<f64>::zeros(n, cols);
    for i in 0..n {
        let idx = levels.iter().position(|l| l == &exposures[i]).unwrap();
        let base = idx * (1 + p);
        design[(i, base)] = 1.0;
        for (j, &cj) in confounders.row(i).iter().enumerate() {
            design[(i, base + 1 + j)] = cj;
        }
    }
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * DVector::from_column_slice(y);
    let coef = gram.cholesky().map(|c| c.solve(&rhs)).ok_or_else(|| {
        Error::FitFailure(
            "degenerate design matrix in outcome regression (a level has too few distinct confounder rows)"
                .into(),
        )
    })?;
    Ok(RegressionFit { levels, p, coef })
}
