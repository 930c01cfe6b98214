//! JSON configuration schema for simulation runs.
//!
//! One top-level [`SimulationConfig`] shape serves every data-driven
//! subcommand; each command uses the sections it needs and reports a missing
//! section by name. All types reject unknown keys so config typos fail
//! loudly instead of silently running defaults.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::graph::{
    read_edge_list, sample_beta_model, sample_latent_beta, sample_rdpg, BetaModelParams,
    InterferenceGraph, RdpgParams,
};
use crate::outcome::{Boost, FixedLinearModel, GmrfParams, Scaling};
use crate::seed::Rng;

/// Top-level simulation configuration (JSON).
///
/// Required everywhere: `seed`, `n`, `graph`. The `design`, `outcome`, and
/// `test` sections are required only by the subcommands that consume them;
/// `scenario` is a free-form label echoed into outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Master seed; per-replicate randomness derives from `(seed, index)`.
    pub seed: u64,
    /// Optional label echoed into output rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Number of units.
    pub n: usize,
    /// Replicate count (fresh graph, assignment, and outcomes per replicate).
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Graph generator.
    pub graph: GraphSpec,
    /// Randomization design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    /// Outcome model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeSpec>,
    /// Interference-test plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestSpec>,
    /// Assignment draws per graph for Monte Carlo effect calculations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_assignments: Option<usize>,
    /// δ-grid resolution for the likelihood fit (`estimate` subcommand).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mle_delta_grid: Option<usize>,
    /// Output path; the `--out` flag overrides it, stdout is the fallback.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn default_replications() -> usize {
    1
}

impl SimulationConfig {
    /// Parses a config from a reader, rejecting unknown keys.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let config: Self =
            serde_json::from_reader(reader).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses a config from a file path, or from stdin when `path` is `-`.
    pub fn from_path(path: &Path) -> Result<Self> {
        if path.as_os_str() == "-" {
            return Self::from_reader(std::io::stdin().lock());
        }
        let file = File::open(path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(BufReader::new(file))
    }

    /// Structural validation that does not need sampling.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "n = {} must be at least 2",
                self.n
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        self.graph.validate(self.n)?;
        if let Some(design) = &self.design {
            design.resolve(self.n)?;
        }
        if let Some(outcome) = &self.outcome {
            outcome.validate()?;
        }
        if let Some(test) = &self.test {
            test.validate()?;
        }
        Ok(())
    }

    /// The design section, by name if missing.
    pub fn design(&self) -> Result<Design> {
        let spec = self
            .design
            .as_ref()
            .ok_or_else(|| Error::Config("missing the `design` section".into()))?;
        spec.resolve(self.n)
    }

    /// The outcome section, by name if missing.
    pub fn outcome(&self) -> Result<&OutcomeSpec> {
        self.outcome
            .as_ref()
            .ok_or_else(|| Error::Config("missing the `outcome` section".into()))
    }

    /// The test section, by name if missing.
    pub fn test(&self) -> Result<&TestSpec> {
        self.test
            .as_ref()
            .ok_or_else(|| Error::Config("missing the `test` section".into()))
    }
}

/// A sampled graph together with the latent structure that produced it.
pub struct SampledGraph {
    /// The realized interference graph.
    pub graph: InterferenceGraph,
    /// Latent positions (random dot product graphs only); needed by the
    /// spectral scaling rules and the closed-form effect formulas.
    pub positions: Option<DMatrix<f64>>,
    /// Superstar markers (β-model with superstars only); feeds the boost.
    pub superstars: Option<Vec<u8>>,
}

/// Graph generator section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Rank-1 random dot product graph with `Beta(a, b)` latent positions:
    /// edge probability `ρ α_i α_j`.
    RdpgBeta {
        /// Beta shape `a`.
        a: f64,
        /// Beta shape `b`.
        b: f64,
        /// Sparsity multiplier `ρ ∈ (0, 1]`.
        #[serde(default = "default_rho")]
        rho: f64,
    },
    /// β-model with a shared base weight and rare superstars: edge
    /// probability `logistic(w_i + w_j)`, `w_i` equal to `superstar_weight`
    /// with probability `superstar_prob` and `base_weight` otherwise.
    BetaModel {
        /// Weight of ordinary units.
        base_weight: f64,
        /// Weight of superstar units.
        superstar_weight: f64,
        /// Probability that a unit is a superstar.
        superstar_prob: f64,
    },
    /// Fixed graph read from an edge-list file (first line `n <count>`,
    /// then one `i j` pair per line, 0-based).
    EdgeList {
        /// Path to the edge-list file.
        path: String,
    },
}

fn default_rho() -> f64 {
    1.0
}

impl GraphSpec {
    fn validate(&self, _n: usize) -> Result<()> {
        match self {
            GraphSpec::RdpgBeta { a, b, rho } => {
                if !(*a > 0.0 && a.is_finite()) || !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "graph.rdpg_beta: shapes a = {a}, b = {b} must be positive"
                    )));
                }
                if !(*rho > 0.0 && *rho <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "graph.rdpg_beta.rho = {rho} must lie in (0, 1]"
                    )));
                }
            }
            GraphSpec::BetaModel { base_weight, superstar_weight, superstar_prob } => {
                if !base_weight.is_finite() || !superstar_weight.is_finite() {
                    return Err(Error::InvalidParameter(
                        "graph.beta_model: weights must be finite".into(),
                    ));
                }
                if !(*superstar_prob >= 0.0 && *superstar_prob <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "graph.beta_model.superstar_prob = {superstar_prob} must lie in [0, 1]"
                    )));
                }
            }
            GraphSpec::EdgeList { .. } => {}
        }
        Ok(())
    }

    /// Draws one graph realization on `n` units.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<SampledGraph> {
        match self {
            GraphSpec::RdpgBeta { a, b, rho } => {
                let positions = sample_latent_beta(n, *a, *b, rng)?;
                let params = RdpgParams::new(positions.clone(), *rho)?;
                let graph = sample_rdpg(&params, rng);
                Ok(SampledGraph { graph, positions: Some(positions), superstars: None })
            }
            GraphSpec::BetaModel { base_weight, superstar_weight, superstar_prob } => {
                let superstars: Vec<u8> =
                    (0..n).map(|_| u8::from(rand::Rng::gen::<f64>(rng) < *superstar_prob)).collect();
                let weights = superstars
                    .iter()
                    .map(|&u| if u == 1 { *superstar_weight } else { *base_weight })
                    .collect();
                let graph = sample_beta_model(&BetaModelParams::new(weights)?, rng);
                Ok(SampledGraph { graph, positions: None, superstars: Some(superstars) })
            }
            GraphSpec::EdgeList { path } => {
                let file = File::open(path).map_err(|e| {
                    Error::InvalidParameter(format!("graph.edge_list: cannot open {path}: {e}"))
                })?;
                let graph = read_edge_list(BufReader::new(file))?;
                if graph.n() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "graph.edge_list: file has n = {} but config says n = {n}",
                        graph.n()
                    )));
                }
                Ok(SampledGraph { graph, positions: None, superstars: None })
            }
        }
    }
}

/// Randomization design section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    /// Independent `Bernoulli(probability)` assignments.
    Bernoulli {
        /// Shared treatment probability.
        probability: f64,
    },
    /// Completely randomized design with a fixed treated count.
    Complete {
        /// Number of treated units.
        treated: usize,
    },
}

impl DesignSpec {
    /// Builds the core design for `n` units.
    pub fn resolve(&self, n: usize) -> Result<Design> {
        let design = match self {
            DesignSpec::Bernoulli { probability } => Design::bernoulli_uniform(n, *probability)?,
            DesignSpec::Complete { treated } => Design::complete(*treated),
        };
        design.validate_for(n)?;
        Ok(design)
    }
}

/// Spillover scaling rule, including spectral forms resolved per graph.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalingSpec {
    /// Both spillover terms are neighborhood averages.
    #[default]
    Degree,
    /// Both terms share the given constant.
    Constant(f64),
    /// Degree-averaged treatment spillover, constant outcome spillover.
    DegreeConstant(f64),
    /// Raw-count treatment spillover, constant outcome spillover.
    RawConstant(f64),
    /// Both terms constant at `κ/‖α‖²` for the realized latent positions α
    /// (κ = 1 puts `|δ| < 1` exactly at the spectral stability edge).
    Spectral {
        /// Fraction of the critical coupling.
        kappa: f64,
    },
    /// Degree-averaged treatment spillover with spectral outcome constant —
    /// the regime of the closed-form effect decomposition.
    DegreeSpectral {
        /// Fraction of the critical coupling.
        kappa: f64,
    },
    /// Raw-count treatment spillover with spectral outcome constant.
    RawSpectral {
        /// Fraction of the critical coupling.
        kappa: f64,
    },
}

impl ScalingSpec {
    fn validate(&self) -> Result<()> {
        match self {
            ScalingSpec::Degree => Ok(()),
            ScalingSpec::Constant(c)
            | ScalingSpec::DegreeConstant(c)
            | ScalingSpec::RawConstant(c) => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "outcome.scaling: constant c = {c} must be positive and finite"
                    )));
                }
                Ok(())
            }
            ScalingSpec::Spectral { kappa }
            | ScalingSpec::DegreeSpectral { kappa }
            | ScalingSpec::RawSpectral { kappa } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "outcome.scaling.kappa = {kappa} must be positive and finite"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Resolves to a concrete [`Scaling`], using `positions` for the
    /// spectral forms.
    pub fn resolve(&self, positions: Option<&DMatrix<f64>>) -> Result<Scaling> {
        let spectral_constant = |kappa: f64| -> Result<f64> {
            let alpha = positions.ok_or_else(|| {
                Error::InvalidParameter(
                    "outcome.scaling: spectral scalings need latent positions; \
                     use a random dot product graph spec"
                        .into(),
                )
            })?;
            let norm_sq: f64 = alpha.iter().map(|v| v * v).sum();
            if norm_sq <= 0.0 {
                return Err(Error::InvalidParameter(
                    "outcome.scaling: latent positions are all zero".into(),
                ));
            }
            Ok(kappa / norm_sq)
        };
        Ok(match self {
            ScalingSpec::Degree => Scaling::Degree,
            ScalingSpec::Constant(c) => Scaling::Constant(*c),
            ScalingSpec::DegreeConstant(c) => Scaling::DegreeConstant(*c),
            ScalingSpec::RawConstant(c) => Scaling::RawConstant(*c),
            ScalingSpec::Spectral { kappa } => Scaling::Constant(spectral_constant(*kappa)?),
            ScalingSpec::DegreeSpectral { kappa } => {
                Scaling::DegreeConstant(spectral_constant(*kappa)?)
            }
            ScalingSpec::RawSpectral { kappa } => {
                Scaling::RawConstant(spectral_constant(*kappa)?)
            }
        })
    }
}

/// Outcome model section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OutcomeSpec {
    /// Gaussian Markov random field with treatment and outcome spillover.
    Gmrf {
        /// Own-treatment coefficient β.
        beta: f64,
        /// Treatment-spillover coefficient γ.
        gamma: f64,
        /// Outcome-spillover coefficient δ, `|δ| < 1`.
        delta: f64,
        /// Conditional noise scale σ² > 0.
        #[serde(default = "default_sigma2")]
        sigma2: f64,
        /// Spillover scaling rule.
        #[serde(default)]
        scaling: ScalingSpec,
        /// Own-treatment boost ε for superstar units (β-model graphs).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        boost_epsilon: Option<f64>,
    },
    /// Deterministic linear exposure model
    /// `Y_i = α + β x_i + γ · treated-neighbor fraction`.
    FixedLinear {
        /// Intercept α.
        alpha: f64,
        /// Own-treatment coefficient β.
        beta: f64,
        /// Treated-fraction coefficient γ.
        gamma: f64,
    },
}

fn default_sigma2() -> f64 {
    1.0
}

impl OutcomeSpec {
    fn validate(&self) -> Result<()> {
        match self {
            OutcomeSpec::Gmrf { beta, gamma, delta, sigma2, scaling, boost_epsilon } => {
                // Delegate coefficient checks to the core constructor so the
                // message names the field and the constraint.
                GmrfParams::new(*beta, *gamma, *delta, *sigma2)?;
                scaling.validate()?;
                if let Some(eps) = boost_epsilon {
                    if !eps.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "outcome.boost_epsilon = {eps} must be finite"
                        )));
                    }
                }
                Ok(())
            }
            OutcomeSpec::FixedLinear { alpha, beta, gamma } => {
                FixedLinearModel::new(*alpha, *beta, *gamma).map(|_| ())
            }
        }
    }

    /// Builds GMRF parameters for a sampled graph (resolving spectral
    /// scalings and attaching the superstar boost).
    pub fn gmrf_params(&self, sampled: &SampledGraph) -> Result<GmrfParams> {
        match self {
            OutcomeSpec::Gmrf { beta, gamma, delta, sigma2, scaling, boost_epsilon } => {
                let mut params = GmrfParams::new(*beta, *gamma, *delta, *sigma2)?
                    .with_scaling(scaling.resolve(sampled.positions.as_ref())?)?;
                if let Some(eps) = boost_epsilon {
                    let markers = sampled.superstars.clone().ok_or_else(|| {
                        Error::InvalidParameter(
                            "outcome.boost_epsilon needs a graph spec that marks superstars \
                             (beta_model)"
                                .into(),
                        )
                    })?;
                    params = params.with_boost(Boost::new(*eps, markers)?);
                }
                Ok(params)
            }
            OutcomeSpec::FixedLinear { .. } => Err(Error::InvalidParameter(
                "outcome is fixed_linear; this command needs a gmrf outcome".into(),
            )),
        }
    }

    /// Builds the fixed linear model if that is what the config declares.
    pub fn fixed_linear(&self) -> Result<FixedLinearModel> {
        match self {
            OutcomeSpec::FixedLinear { alpha, beta, gamma } => {
                FixedLinearModel::new(*alpha, *beta, *gamma)
            }
            OutcomeSpec::Gmrf { .. } => Err(Error::InvalidParameter(
                "outcome is gmrf; this command needs a fixed_linear outcome".into(),
            )),
        }
    }
}

/// Interference-test section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSpec {
    /// Fraction of units selected (at random) as focal, strictly in (0, 1).
    #[serde(default = "default_focal_fraction")]
    pub focal_fraction: f64,
    /// Test statistic.
    #[serde(default)]
    pub statistic: StatisticSpec,
    /// Resample count `R ≥ 99`.
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    /// Rejection direction.
    #[serde(default)]
    pub sidedness: SidednessSpec,
}

fn default_focal_fraction() -> f64 {
    0.3
}

fn default_resamples() -> usize {
    500
}

impl Default for TestSpec {
    fn default() -> Self {
        Self {
            focal_fraction: default_focal_fraction(),
            statistic: StatisticSpec::default(),
            resamples: default_resamples(),
            sidedness: SidednessSpec::default(),
        }
    }
}

impl TestSpec {
    fn validate(&self) -> Result<()> {
        if !(self.focal_fraction > 0.0 && self.focal_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test.focal_fraction = {} must lie strictly in (0, 1)",
                self.focal_fraction
            )));
        }
        if self.resamples < 99 {
            return Err(Error::InvalidParameter(format!(
                "test.resamples = {} must be at least 99",
                self.resamples
            )));
        }
        Ok(())
    }
}

/// Test statistic selector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StatisticSpec {
    /// Treated-minus-untreated neighbor contrast of focal outcomes.
    #[default]
    Tu,
    /// Rank correlation with distance to the nearest treated non-focal unit.
    RankCorrelation,
}

impl StatisticSpec {
    /// Core statistic kind.
    pub fn resolve(&self) -> crate::crt::TestStatistic {
        match self {
            StatisticSpec::Tu => crate::crt::TestStatistic::TU,
            StatisticSpec::RankCorrelation => crate::crt::TestStatistic::RankCorrelation,
        }
    }

    /// Stable label for CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            StatisticSpec::Tu => "tu",
            StatisticSpec::RankCorrelation => "rank_correlation",
        }
    }
}

/// Rejection-direction selector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SidednessSpec {
    /// Reject for large `T`.
    #[default]
    Greater,
    /// Reject for large `|T|`.
    TwoSided,
}

impl SidednessSpec {
    /// Core sidedness.
    pub fn resolve(&self) -> crate::crt::Sidedness {
        match self {
            SidednessSpec::Greater => crate::crt::Sidedness::Greater,
            SidednessSpec::TwoSided => crate::crt::Sidedness::TwoSided,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "seed": 7,
            "n": 20,
            "graph": {"rdpg_beta": {"a": 1.0, "b": 3.0}},
            "design": {"bernoulli": {"probability": 0.4}},
            "outcome": {"gmrf": {"beta": 5.0, "gamma": 5.0, "delta": 0.0}}
        })
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = SimulationConfig::from_reader(minimal_json().to_string().as_bytes()).unwrap();
        assert_eq!(cfg.replications, 1);
        assert_eq!(cfg.seed, 7);
        match cfg.graph {
            GraphSpec::RdpgBeta { rho, .. } => assert_eq!(rho, 1.0),
            _ => panic!("wrong graph spec"),
        }
        match cfg.outcome.as_ref().unwrap() {
            OutcomeSpec::Gmrf { sigma2, scaling, .. } => {
                assert_eq!(*sigma2, 1.0);
                assert!(matches!(scaling, ScalingSpec::Degree));
            }
            OutcomeSpec::FixedLinear { .. } => panic!("wrong outcome spec"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = minimal_json();
        v["typo_field"] = serde_json::json!(1);
        let err = SimulationConfig::from_reader(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("typo_field"), "{err}");

        let mut v = minimal_json();
        v["graph"] = serde_json::json!({"rdpg_beta": {"a": 1.0, "b": 3.0, "rh": 1.0}});
        let err = SimulationConfig::from_reader(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("rh"), "{err}");
    }

    #[test]
    fn invalid_delta_names_field_and_constraint() {
        let mut v = minimal_json();
        v["outcome"]["gmrf"]["delta"] = serde_json::json!(1.2);
        let err = SimulationConfig::from_reader(v.to_string().as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("delta"), "{msg}");
        assert!(msg.contains("|delta| < 1"), "{msg}");
    }

    #[test]
    fn scaling_spec_forms_parse_and_resolve() {
        for (json, expect_positions) in [
            ("\"degree\"", false),
            ("{\"constant\": 0.02}", false),
            ("{\"degree_constant\": 0.02}", false),
            ("{\"raw_constant\": 0.02}", false),
            ("{\"spectral\": {\"kappa\": 1.0}}", true),
            ("{\"degree_spectral\": {\"kappa\": 1.0}}", true),
            ("{\"raw_spectral\": {\"kappa\": 0.5}}", true),
        ] {
            let spec: ScalingSpec = serde_json::from_str(json).unwrap();
            spec.validate().unwrap();
            let positions = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, 0.5, 0.5]);
            if expect_positions {
                assert!(spec.resolve(None).is_err(), "{json}");
                let resolved = spec.resolve(Some(&positions)).unwrap();
                // ‖α‖² = 1, so the spectral constant equals κ.
                match resolved {
                    Scaling::Constant(c) | Scaling::DegreeConstant(c) | Scaling::RawConstant(c) => {
                        assert!(c > 0.0 && c <= 1.0)
                    }
                    Scaling::Degree => panic!("spectral resolved to degree"),
                }
            } else {
                spec.resolve(None).unwrap();
            }
        }
        assert!(serde_json::from_str::<ScalingSpec>("{\"constant\": -1.0}")
            .unwrap()
            .validate()
            .is_err());
    }

    #[test]
    fn graph_specs_sample_expected_structure() {
        let mut rng = crate::seed::replicate_rng(1, 0);
        let rdpg = GraphSpec::RdpgBeta { a: 1.0, b: 3.0, rho: 1.0 };
        let sampled = rdpg.sample(30, &mut rng).unwrap();
        assert_eq!(sampled.graph.n(), 30);
        assert!(sampled.positions.is_some());
        assert!(sampled.superstars.is_none());

        let bm = GraphSpec::BetaModel {
            base_weight: -2.0,
            superstar_weight: 20.0,
            superstar_prob: 0.5,
        };
        let sampled = bm.sample(30, &mut rng).unwrap();
        let stars = sampled.superstars.unwrap();
        assert_eq!(stars.len(), 30);
        assert!(stars.iter().any(|&u| u == 1));
        // Superstars connect to almost everyone.
        let star = stars.iter().position(|&u| u == 1).unwrap();
        assert!(sampled.graph.degree(star) >= 25);
    }

    #[test]
    fn boost_requires_superstar_graph() {
        let cfg = SimulationConfig::from_reader(
            serde_json::json!({
                "seed": 1,
                "n": 10,
                "graph": {"rdpg_beta": {"a": 1.0, "b": 3.0}},
                "outcome": {"gmrf": {"beta": 2.0, "gamma": 2.0, "delta": 0.5,
                                      "boost_epsilon": 10.0}}
            })
            .to_string()
            .as_bytes(),
        )
        .unwrap();
        let mut rng = crate::seed::replicate_rng(2, 0);
        let sampled = cfg.graph.sample(cfg.n, &mut rng).unwrap();
        let err = cfg.outcome().unwrap().gmrf_params(&sampled).unwrap_err();
        assert!(err.to_string().contains("boost_epsilon"), "{err}");
    }

    #[test]
    fn missing_sections_are_named() {
        let cfg = SimulationConfig::from_reader(
            serde_json::json!({
                "seed": 1,
                "n": 10,
                "graph": {"rdpg_beta": {"a": 1.0, "b": 3.0}}
            })
            .to_string()
            .as_bytes(),
        )
        .unwrap();
        assert!(cfg.design().unwrap_err().to_string().contains("design"));
        assert!(cfg.outcome().unwrap_err().to_string().contains("outcome"));
        assert!(cfg.test().unwrap_err().to_string().contains("test"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = SimulationConfig::from_reader(minimal_json().to_string().as_bytes()).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = SimulationConfig::from_reader(text.as_bytes()).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.n, cfg.n);
    }
}
