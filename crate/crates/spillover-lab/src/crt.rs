//! Conditional (focal-unit) randomization tests for interference.
//!
//! The null hypothesis is "no interference": a unit's outcome depends only
//! on its own treatment. The test fixes the assignments of a chosen *focal*
//! set, redraws the non-focal assignments from the experiment's Bernoulli
//! design, and recomputes a statistic that reads outcomes **only on focal
//! units**. Under the null those outcomes are invariant across resamples, so
//! the p-value
//!
//! ```text
//! p = (1 + #{r : T_r ≥ T_obs}) / (R + 1)
//! ```
//!
//! is finite-sample valid at every level. Two statistic kernels are
//! provided: the treated-neighbor outcome contrast `T_U` and a Spearman rank
//! correlation between focal outcomes and graph distance to the nearest
//! treated non-focal unit.
//!
//! Resamples are evaluated in parallel with per-resample seeds derived from
//! the plan's seed, so reports do not depend on the thread schedule.

use std::cmp::Ordering;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::Design;
use crate::error::{Error, Result};
use crate::graph::{distance_to_nearest, InterferenceGraph};
use crate::seed::{replicate_rng, Rng};

/// Statistic kernel of a randomization test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStatistic {
    /// Treated-minus-untreated neighbor contrast of focal outcomes.
    TU,
    /// Spearman correlation of focal outcomes with distance to the nearest
    /// treated non-focal unit.
    RankCorrelation,
}

/// Rejection direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// Reject for large `T` (spillover pushes the statistic up).
    Greater,
    /// Reject for large `|T|`.
    TwoSided,
}

/// Everything a randomization test needs besides the data.
#[derive(Debug, Clone)]
pub struct TestPlan {
    /// Focal unit set; nonempty, distinct, a strict subset of all units.
    pub focal: Vec<usize>,
    /// Statistic kernel.
    pub statistic: TestStatistic,
    /// Resample count `R ≥ 99`.
    pub resamples: usize,
    /// Rejection direction.
    pub sidedness: Sidedness,
    /// Assignment design; must be Bernoulli for resampling.
    pub design: Design,
    /// Master seed; resample `r` uses a seed derived from `(seed, r)`.
    pub seed: u64,
}

impl TestPlan {
    fn validate(&self, n: usize) -> Result<()> {
        if self.focal.is_empty() {
            return Err(Error::InvalidParameter("focal set must be nonempty".into()));
        }
        let mut seen = vec![false; n];
        for &u in &self.focal {
            if u >= n {
                return Err(Error::InvalidParameter(format!(
                    "focal unit {u} out of range for n = {n}"
                )));
            }
            if seen[u] {
                return Err(Error::InvalidParameter(format!("focal unit {u} listed twice")));
            }
            seen[u] = true;
        }
        if self.focal.len() >= n {
            return Err(Error::InvalidParameter(
                "focal set must be a strict subset of the units".into(),
            ));
        }
        if self.resamples < 99 {
            return Err(Error::InvalidParameter(format!(
                "resamples = {} must be at least 99",
                self.resamples
            )));
        }
        self.design.validate_for(n)
    }
}

/// Outcome of one randomization test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    /// Statistic on the observed data.
    pub observed: f64,
    /// `(1 + #{T_r ≥ T_obs}) / (R + 1)`; always in `(0, 1]`.
    pub p_value: f64,
    /// Mean of the resampled statistics.
    pub resample_mean: f64,
    /// Standard deviation of the resampled statistics.
    pub resample_sd: f64,
    /// Number of resamples evaluated.
    pub resamples_used: usize,
}

/// Uniformly random focal set of size `round(fraction·n)`, clamped to
/// `[1, n−1]`; returned sorted.
pub fn select_focal_random(n: usize, fraction: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 units to pick focal units".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "focal fraction {fraction} must lie strictly inside (0, 1)"
        )));
    }
    let size = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut focal = rand::seq::index::sample(rng, n, size).into_vec();
    focal.sort_unstable();
    Ok(focal)
}

fn focal_mask(n: usize, focal: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &u in focal {
        if u >= n {
            return Err(Error::InvalidParameter(format!("focal unit {u} out of range for n = {n}")));
        }
        mask[u] = true;
    }
    Ok(mask)
}

/// Treated-neighbor outcome contrast over focal units:
/// `T_U = U(x, y) − U(1−x, y)` with
/// `U = Σ_{i∈𝒰} Σ_{j∉𝒰} x_j y_i z_ij / Σ_{i∈𝒰} Σ_{j∉𝒰} x_j z_ij`
/// and `0/0` defined as 0. Reads outcomes only on focal units.
pub fn stat_tu(
    x: &[u8],
    y: &[f64],
    graph: &InterferenceGraph,
    focal: &[usize],
) -> Result<f64> {
    let n = graph.n();
    crate::design::validate_assignment(x, n)?;
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("y has {} entries for n = {n}", y.len())));
    }
    let mask = focal_mask(n, focal)?;
    let (mut num, mut den, mut flip_num, mut flip_den) = (0.0, 0.0, 0.0, 0.0);
    for &i in focal {
        for &j in graph.neighbors(i) {
            if mask[j] {
                continue;
            }
            if x[j] == 1 {
                num += y[i];
                den += 1.0;
            } else {
                flip_num += y[i];
                flip_den += 1.0;
            }
        }
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    Ok(ratio(num, den) - ratio(flip_num, flip_den))
}

/// Average ranks (1-based, ties averaged) under the given order.
fn average_ranks<T, F>(items: &[T], cmp: F) -> Vec<f64>
where
    F: Fn(&T, &T) -> Ordering,
{
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| cmp(&items[a], &items[b]));
    let mut ranks = vec![0.0; items.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && cmp(&items[order[end]], &items[order[start]]) == Ordering::Equal
        {
            end += 1;
        }
        // Tied block occupying positions start+1..=end gets the average rank.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&ai, &bi) in a.iter().zip(b) {
        cov += (ai - ma) * (bi - mb);
        va += (ai - ma).powi(2);
        vb += (bi - mb).powi(2);
    }
    if va <= 1e-12 || vb <= 1e-12 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation between focal outcomes and the graph distance
/// to the nearest treated non-focal unit.
///
/// Unreachable units rank last (infinite distance); ties get average ranks;
/// a constant ranking on either side returns 0.
pub fn stat_rank_correlation(
    x: &[u8],
    y: &[f64],
    graph: &InterferenceGraph,
    focal: &[usize],
) -> Result<f64> {
    let n = graph.n();
    crate::design::validate_assignment(x, n)?;
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("y has {} entries for n = {n}", y.len())));
    }
    if focal.len() < 2 {
        return Err(Error::InvalidParameter(
            "rank correlation needs at least 2 focal units".into(),
        ));
    }
    let mask = focal_mask(n, focal)?;
    let treated_nonfocal: Vec<usize> =
        (0..n).filter(|&j| !mask[j] && x[j] == 1).collect();
    let distances = distance_to_nearest(graph, focal, &treated_nonfocal)?;
    let focal_y: Vec<f64> = focal.iter().map(|&i| y[i]).collect();
    if focal_y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("focal outcomes must be finite".into()));
    }
    let y_ranks = average_ranks(&focal_y, |a, b| a.total_cmp(b));
    let d_ranks = average_ranks(&distances, |a, b| a.cmp(b));
    Ok(pearson(&y_ranks, &d_ranks))
}

fn evaluate_statistic(
    statistic: TestStatistic,
    x: &[u8],
    y: &[f64],
    graph: &InterferenceGraph,
    focal: &[usize],
) -> Result<f64> {
    match statistic {
        TestStatistic::TU => stat_tu(x, y, graph, focal),
        TestStatistic::RankCorrelation => stat_rank_correlation(x, y, graph, focal),
    }
}

/// Runs the conditional randomization test: focal assignments stay at their
/// observed values, non-focal assignments are redrawn from the Bernoulli
/// design `R` times, and the statistic is recomputed on each resample.
pub fn crt_pvalue(
    x_obs: &[u8],
    y_obs: &[f64],
    graph: &InterferenceGraph,
    plan: &TestPlan,
) -> Result<TestReport> {
    let n = graph.n();
    plan.validate(n)?;
    crate::design::validate_assignment(x_obs, n)?;
    let probabilities = match &plan.design {
        Design::Bernoulli { probabilities } => probabilities.clone(),
        _ => {
            return Err(Error::InvalidParameter(
                "conditional resampling requires a Bernoulli design".into(),
            ))
        }
    };
    let mask = focal_mask(n, &plan.focal)?;
    let observed = evaluate_statistic(plan.statistic, x_obs, y_obs, graph, &plan.focal)?;
    let resampled: Vec<f64> = (0..plan.resamples)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut rng = replicate_rng(plan.seed, r as u64);
            let mut x = x_obs.to_vec();
            for j in 0..n {
                if !mask[j] {
                    x[j] = u8::from(rng.gen::<f64>() < probabilities[j]);
                }
            }
            evaluate_statistic(plan.statistic, &x, y_obs, graph, &plan.focal)
        })
        .collect::<Result<Vec<_>>>()?;
    let exceed = |t: f64| -> bool {
        match plan.sidedness {
            Sidedness::Greater => t >= observed,
            Sidedness::TwoSided => t.abs() >= observed.abs(),
        }
    };
    let count = resampled.iter().filter(|&&t| exceed(t)).count();
    let r = plan.resamples as f64;
    let mean = resampled.iter().sum::<f64>() / r;
    let sd = (resampled.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
    Ok(TestReport {
        observed,
        p_value: (1.0 + count as f64) / (r + 1.0),
        resample_mean: mean,
        resample_sd: sd,
        resamples_used: plan.resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{gmrf_sample, GmrfParams, Scaling};
    use crate::seed::replicate_rng;
    use approx::assert_relative_eq;

    fn path(n: usize) -> InterferenceGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        InterferenceGraph::from_edges(n, &edges).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> InterferenceGraph {
        let mut rng = replicate_rng(500, seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rand::Rng::gen::<f64>(&mut rng) < p {
                    edges.push((i, j));
                }
            }
        }
        InterferenceGraph::from_edges(n, &edges).unwrap()
    }

    fn plan_tu(n: usize, focal: Vec<usize>, seed: u64) -> TestPlan {
        TestPlan {
            focal,
            statistic: TestStatistic::TU,
            resamples: 199,
            sidedness: Sidedness::Greater,
            design: Design::bernoulli_uniform(n, 0.5).unwrap(),
            seed,
        }
    }

    #[test]
    fn tu_hand_case_exercises_zero_over_zero() {
        // Focal unit 0 with the single non-focal neighbor 1 treated:
        // U = 3; flipping the assignment leaves no treated neighbor, so the
        // flipped ratio is the 0/0 convention, 0. T_U = 3.
        let g = path(2);
        let t = stat_tu(&[0, 1], &[3.0, 99.0], &g, &[0]).unwrap();
        assert_relative_eq!(t, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn tu_is_antisymmetric_under_flips() {
        let g = random_graph(20, 0.3, 1);
        let mut rng = replicate_rng(501, 0);
        for _ in 0..20 {
            let x: Vec<u8> = (0..20).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.5)).collect();
            let y: Vec<f64> = (0..20).map(|_| rand::Rng::gen::<f64>(&mut rng) * 6.0 - 3.0).collect();
            let flipped: Vec<u8> = x.iter().map(|&v| 1 - v).collect();
            let focal = vec![0, 3, 7, 11];
            let t = stat_tu(&x, &y, &g, &focal).unwrap();
            let t_flip = stat_tu(&flipped, &y, &g, &focal).unwrap();
            assert_relative_eq!(t_flip, -t, epsilon = 1e-12);
        }
    }

    #[test]
    fn tu_vanishes_for_constant_focal_outcomes() {
        // Both denominators positive (one treated, one untreated non-focal
        // neighbor) and y constant on focal units: T_U = c − c = 0.
        let g = path(3);
        let t = stat_tu(&[1, 0, 0], &[99.0, 4.0, 98.0], &g, &[1]).unwrap();
        assert_relative_eq!(t, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rank_correlation_hand_cases() {
        // Constant focal outcomes: degenerate ranking, statistic 0.
        let g = path(6);
        let x = [0, 0, 0, 0, 0, 1];
        assert_eq!(stat_rank_correlation(&x, &[2.0; 6], &g, &[0, 1, 2]).unwrap(), 0.0);
        // Outcomes decreasing in distance to the treated end of the path:
        // perfect negative rank correlation.
        let y = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(
            stat_rank_correlation(&x, &y, &g, &[0, 1, 2]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        // Permuting the focal list leaves the statistic unchanged.
        assert_relative_eq!(
            stat_rank_correlation(&x, &y, &g, &[2, 0, 1]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        // Fewer than 2 focal units is an error.
        assert!(stat_rank_correlation(&x, &y, &g, &[0]).is_err());
    }

    #[test]
    fn rank_correlation_handles_infinite_distances() {
        // Two components; the focal unit in the treated component is closer,
        // the other is unreachable and ranks last.
        let g = InterferenceGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let x = [0, 1, 0, 0];
        let y = [5.0, 0.0, 7.0, 0.0];
        // dist(0→1) = 1, dist(2→∅ in its component) = ∞; y ranks (1, 2) and
        // distance ranks (1, 2) agree perfectly.
        assert_relative_eq!(stat_rank_correlation(&x, &y, &g, &[0, 2]).unwrap(), 1.0, epsilon = 1e-12);
        // No treated non-focal unit at all: every distance is infinite and
        // the statistic degenerates to 0.
        assert_eq!(stat_rank_correlation(&[0; 4], &y, &g, &[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn average_ranks_tie_handling() {
        let ranks = average_ranks(&[3.0f64, 1.0, 3.0, 2.0], |a, b| a.total_cmp(b));
        assert_eq!(ranks, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn plan_validation() {
        let g = path(6);
        let y = vec![0.0; 6];
        let x = vec![0u8; 6];
        let mut plan = plan_tu(6, vec![], 1);
        assert!(crt_pvalue(&x, &y, &g, &plan).is_err());
        plan.focal = (0..6).collect();
        assert!(crt_pvalue(&x, &y, &g, &plan).is_err());
        plan.focal = vec![1, 1];
        assert!(crt_pvalue(&x, &y, &g, &plan).is_err());
        plan.focal = vec![1];
        plan.resamples = 50;
        assert!(crt_pvalue(&x, &y, &g, &plan).is_err());
        plan.resamples = 99;
        plan.design = Design::complete(3);
        assert!(crt_pvalue(&x, &y, &g, &plan).is_err());
        plan.design = Design::bernoulli_uniform(6, 0.5).unwrap();
        assert!(crt_pvalue(&x, &y, &g, &plan).is_ok());
    }

    #[test]
    fn constant_statistic_gives_p_one() {
        let g = random_graph(12, 0.4, 2);
        let plan = plan_tu(12, vec![0, 1, 2], 7);
        let report = crt_pvalue(&vec![0u8; 12], &vec![0.0; 12], &g, &plan).unwrap();
        assert_eq!(report.p_value, 1.0);
        assert_eq!(report.observed, 0.0);
        assert_eq!(report.resamples_used, 199);
    }

    #[test]
    fn p_value_support_is_discrete() {
        let g = random_graph(15, 0.35, 3);
        let mut rng = replicate_rng(502, 0);
        let x: Vec<u8> = (0..15).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.5)).collect();
        let y: Vec<f64> = (0..15).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
        let plan = plan_tu(15, vec![0, 4, 8], 11);
        let report = crt_pvalue(&x, &y, &g, &plan).unwrap();
        let scaled = report.p_value * 200.0;
        assert!((scaled - scaled.round()).abs() < 1e-9, "p = {}", report.p_value);
        assert!(report.p_value >= 1.0 / 200.0 && report.p_value <= 1.0);
    }

    #[test]
    fn reports_are_deterministic_and_thread_invariant() {
        let g = random_graph(30, 0.2, 4);
        let mut rng = replicate_rng(503, 0);
        let x: Vec<u8> = (0..30).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.5)).collect();
        let y: Vec<f64> = (0..30).map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0).collect();
        let plan = plan_tu(30, vec![0, 5, 10, 15, 20], 21);
        let a = crt_pvalue(&x, &y, &g, &plan).unwrap();
        let b = crt_pvalue(&x, &y, &g, &plan).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let c = pool.install(|| crt_pvalue(&x, &y, &g, &plan).unwrap());
        assert_eq!(a, c);
        // A different seed moves the resampling draw.
        let mut other = plan.clone();
        other.seed = 22;
        let d = crt_pvalue(&x, &y, &g, &other).unwrap();
        assert_eq!(a.observed, d.observed);
        assert!(a.p_value != d.p_value || a.resample_mean != d.resample_mean);
    }

    #[test]
    fn non_focal_outcomes_are_never_read() {
        // Poisoning non-focal outcomes with sentinels must not move either
        // statistic's report.
        let g = random_graph(24, 0.25, 5);
        let mut rng = replicate_rng(504, 0);
        let x: Vec<u8> = (0..24).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.5)).collect();
        let y: Vec<f64> = (0..24).map(|_| rand::Rng::gen::<f64>(&mut rng) * 3.0).collect();
        let focal = vec![1, 6, 9, 14, 19];
        for statistic in [TestStatistic::TU, TestStatistic::RankCorrelation] {
            let plan = TestPlan { statistic, ..plan_tu(24, focal.clone(), 31) };
            let clean = crt_pvalue(&x, &y, &g, &plan).unwrap();
            let mut poisoned = y.clone();
            for j in 0..24 {
                if !focal.contains(&j) {
                    poisoned[j] = 1e12;
                }
            }
            let dirty = crt_pvalue(&x, &poisoned, &g, &plan).unwrap();
            assert_eq!(clean, dirty, "{statistic:?} read a non-focal outcome");
        }
    }

    #[test]
    fn select_focal_random_contract() {
        let mut rng = replicate_rng(505, 0);
        let focal = select_focal_random(500, 0.3, &mut rng).unwrap();
        assert_eq!(focal.len(), 150);
        assert!(focal.windows(2).all(|w| w[0] < w[1]));
        // Tiny fractions clamp to one unit.
        assert_eq!(select_focal_random(10, 1e-9, &mut replicate_rng(505, 1)).unwrap().len(), 1);
        // High fractions stay a strict subset.
        assert_eq!(select_focal_random(10, 0.99, &mut replicate_rng(505, 2)).unwrap().len(), 9);
        // Same seed, same set.
        let a = select_focal_random(100, 0.4, &mut replicate_rng(505, 3)).unwrap();
        let b = select_focal_random(100, 0.4, &mut replicate_rng(505, 3)).unwrap();
        assert_eq!(a, b);
        assert!(select_focal_random(100, 0.0, &mut rng).is_err());
        assert!(select_focal_random(100, 1.0, &mut rng).is_err());
    }

    /// Light level-control check (the acceptance suite runs the full one):
    /// with γ = δ = 0 the null holds, so P(p ≤ 0.05) stays near or below
    /// 0.05 up to Monte Carlo error.
    #[test]
    fn null_level_is_controlled() {
        let runs = 200;
        let n = 60;
        let alpha = 0.05;
        let mut rejections = 0;
        for run in 0..runs {
            let g = random_graph(n, 0.12, 600 + run);
            let mut rng = replicate_rng(601, run);
            let x: Vec<u8> = (0..n).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.4)).collect();
            let params = GmrfParams::new(3.0, 0.0, 0.0, 1.0).unwrap();
            let y = gmrf_sample(&params, &g, &x, &mut rng).unwrap();
            let y: Vec<f64> = y.iter().copied().collect();
            let focal = select_focal_random(n, 0.3, &mut rng).unwrap();
            let plan = TestPlan {
                focal,
                statistic: TestStatistic::TU,
                resamples: 99,
                sidedness: Sidedness::Greater,
                design: Design::bernoulli_uniform(n, 0.4).unwrap(),
                seed: 9000 + run,
            };
            if crt_pvalue(&x, &y, &g, &plan).unwrap().p_value <= alpha {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / runs as f64;
        let se = (alpha * (1.0 - alpha) / runs as f64).sqrt();
        assert!(rate <= alpha + 4.0 * se, "null rejection rate {rate}");
    }

    /// Power sanity: strong treatment spillover drives p-values down.
    #[test]
    fn treatment_spillover_is_detected() {
        let runs = 20;
        let n = 80;
        let mut total_p = 0.0;
        for run in 0..runs {
            let g = random_graph(n, 0.1, 700 + run);
            let mut rng = replicate_rng(701, run);
            let x: Vec<u8> = (0..n).map(|_| u8::from(rand::Rng::gen::<f64>(&mut rng) < 0.4)).collect();
            // Raw-count treatment spillover: each treated neighbor adds γ to
            // the outcome, the regime T_U is built to see (a neighborhood
            // average would shrink the per-neighbor signal to γ/degree).
            let params = GmrfParams::new(5.0, 5.0, 0.0, 1.0)
                .unwrap()
                .with_scaling(Scaling::RawConstant(0.05))
                .unwrap();
            let y = gmrf_sample(&params, &g, &x, &mut rng).unwrap();
            let y: Vec<f64> = y.iter().copied().collect();
            let focal = select_focal_random(n, 0.3, &mut rng).unwrap();
            let plan = TestPlan {
                focal,
                statistic: TestStatistic::TU,
                resamples: 199,
                sidedness: Sidedness::Greater,
                design: Design::bernoulli_uniform(n, 0.4).unwrap(),
                seed: 9100 + run,
            };
            total_p += crt_pvalue(&x, &y, &g, &plan).unwrap().p_value;
        }
        let mean_p = total_p / runs as f64;
        assert!(mean_p < 0.2, "mean p under strong spillover = {mean_p}");
    }

    #[test]
    fn report_serializes() {
        let report = TestReport {
            observed: 1.5,
            p_value: 0.02,
            resample_mean: 0.1,
            resample_sd: 0.4,
            resamples_used: 99,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"p_value\":0.02"), "{json}");
        assert!(json.contains("\"resamples_used\":99"), "{json}");
    }
}
