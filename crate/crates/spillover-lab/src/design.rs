//! Treatment assignment designs and their exact probability calculus.
//!
//! Three designs are supported: unit-level Bernoulli with per-unit
//! probabilities strictly inside `(0, 1)` (inverse-probability weights divide
//! by them), completely randomized assignment of exactly `n_treated` units,
//! and cluster randomization where whole clusters flip together. Exhaustive
//! enumeration over all `2^n` assignments backs the brute-force oracles used
//! to validate estimands and estimators on small instances.

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Hard cap on exhaustive assignment enumeration (`2^n` grows fast; oracles
/// use `n ≤ 12`).
pub const ENUMERATION_CAP: usize = 20;

/// A randomized treatment assignment mechanism over `n` units.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    /// Independent unit-level coins with probabilities strictly in `(0, 1)`.
    Bernoulli { probabilities: Vec<f64> },
    /// Uniformly random subset of exactly `n_treated` treated units.
    Complete { n_treated: usize },
    /// Whole clusters treated together, each with probability `probability`.
    Cluster { labels: Vec<usize>, probability: f64 },
}

impl Design {
    /// Bernoulli design with per-unit probabilities, validated interior.
    pub fn bernoulli(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidParameter("Bernoulli design needs n >= 1".into()));
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::ProbabilityOutOfRange(format!(
                    "Bernoulli probability for unit {i} is {p}; must lie strictly in (0, 1)"
                )));
            }
        }
        Ok(Design::Bernoulli { probabilities })
    }

    /// Bernoulli design with one shared probability for all `n` units.
    pub fn bernoulli_uniform(n: usize, probability: f64) -> Result<Self> {
        Self::bernoulli(vec![probability; n])
    }

    /// Completely randomized design treating exactly `n_treated` units.
    pub fn complete(n_treated: usize) -> Self {
        Design::Complete { n_treated }
    }

    /// Cluster design from per-unit labels and a shared cluster probability.
    pub fn cluster(labels: Vec<usize>, probability: f64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("cluster design needs n >= 1 labels".into()));
        }
        if !(probability > 0.0 && probability < 1.0) {
            return Err(Error::ProbabilityOutOfRange(format!(
                "cluster probability {probability} must lie strictly in (0, 1)"
            )));
        }
        Ok(Design::Cluster { labels, probability })
    }

    /// Checks the design is usable for an experiment on `n` units.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        match self {
            Design::Bernoulli { probabilities } => {
                if probabilities.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "Bernoulli design has {} probabilities for n = {n}",
                        probabilities.len()
                    )));
                }
            }
            Design::Complete { n_treated } => {
                if *n_treated > n {
                    return Err(Error::InvalidParameter(format!(
                        "complete design treats {n_treated} of {n} units"
                    )));
                }
            }
            Design::Cluster { labels, .. } => {
                if labels.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "cluster design has {} labels for n = {n}",
                        labels.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Checks `x` is a valid assignment vector for `n` units (binary entries).
pub fn validate_assignment(x: &[u8], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment has length {} for n = {n}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().position(|&v| v > 1) {
        return Err(Error::InvalidParameter(format!(
            "assignment entry {i} is {}; entries must be 0 or 1",
            x[i]
        )));
    }
    Ok(())
}

/// Draws one assignment from the design.
pub fn sample_assignment(design: &Design, n: usize, rng: &mut Rng) -> Result<Vec<u8>> {
    design.validate_for(n)?;
    let x = match design {
        Design::Bernoulli { probabilities } => probabilities
            .iter()
            .map(|&p| u8::from(rng.gen::<f64>() < p))
            .collect(),
        Design::Complete { n_treated } => {
            let mut x = vec![0u8; n];
            for i in sample_indices(rng, n, *n_treated) {
                x[i] = 1;
            }
            x
        }
        Design::Cluster { labels, probability } => {
            // One coin per distinct label, in sorted label order so the draw
            // is a deterministic function of the random stream.
            let mut distinct: Vec<usize> = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let mut x = vec![0u8; n];
            for label in distinct {
                let treated = rng.gen::<f64>() < *probability;
                if treated {
                    for (i, &l) in labels.iter().enumerate() {
                        if l == label {
                            x[i] = 1;
                        }
                    }
                }
            }
            x
        }
    };
    Ok(x)
}

/// Exact probability the design produces assignment `x`.
pub fn assignment_probability(design: &Design, x: &[u8]) -> Result<f64> {
    let n = x.len();
    design.validate_for(n)?;
    validate_assignment(x, n)?;
    let p = match design {
        Design::Bernoulli { probabilities } => x
            .iter()
            .zip(probabilities)
            .map(|(&xi, &pi)| if xi == 1 { pi } else { 1.0 - pi })
            .product(),
        Design::Complete { n_treated } => {
            let treated = x.iter().map(|&v| usize::from(v)).sum::<usize>();
            if treated == *n_treated {
                1.0 / binomial_coefficient(n, *n_treated)
            } else {
                0.0
            }
        }
        Design::Cluster { labels, probability } => {
            // x must be constant within every cluster; count treated clusters.
            let mut distinct: Vec<usize> = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let mut prob = 1.0;
            for label in distinct {
                let values: Vec<u8> =
                    labels.iter().zip(x).filter(|(l, _)| **l == label).map(|(_, &v)| v).collect();
                if values.iter().any(|&v| v != values[0]) {
                    return Ok(0.0);
                }
                prob *= if values[0] == 1 { *probability } else { 1.0 - *probability };
            }
            prob
        }
    };
    Ok(p)
}

/// Binomial coefficient `C(n, k)` as a float, computed with interleaved
/// division so intermediate magnitudes stay near the result.
pub fn binomial_coefficient(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 1..=k {
        acc *= (n - k + i) as f64 / i as f64;
    }
    acc
}

/// All `2^n` assignments in lexicographic order (unit 0 is the most
/// significant coordinate). Errors above the hard cap of 20 units.
pub fn enumerate_assignments(n: usize) -> Result<Vec<Vec<u8>>> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { requested: n, cap: ENUMERATION_CAP });
    }
    let total = 1usize << n;
    let mut out = Vec::with_capacity(total);
    for mask in 0..total {
        let x: Vec<u8> = (0..n).map(|j| ((mask >> (n - 1 - j)) & 1) as u8).collect();
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::replicate_rng;
    use std::collections::HashMap;

    #[test]
    fn constructors_validate() {
        assert!(Design::bernoulli(vec![0.5, 0.2]).is_ok());
        assert!(Design::bernoulli(vec![0.0, 0.2]).is_err());
        assert!(Design::bernoulli(vec![1.0]).is_err());
        assert!(Design::bernoulli(vec![]).is_err());
        assert!(Design::cluster(vec![0, 0, 1], 0.5).is_ok());
        assert!(Design::cluster(vec![0], 1.0).is_err());
        assert!(Design::complete(3).validate_for(2).is_err());
        assert!(Design::bernoulli_uniform(2, 0.5).unwrap().validate_for(3).is_err());
    }

    #[test]
    fn bernoulli_near_one_frequency_within_4_se() {
        let pi = 0.999;
        let n = 5usize;
        let design = Design::bernoulli_uniform(n, pi).unwrap();
        let reps = 10_000usize;
        let mut rng = replicate_rng(11, 0);
        let mut hits = vec![0usize; n];
        for _ in 0..reps {
            let x = sample_assignment(&design, n, &mut rng).unwrap();
            for (h, &xi) in hits.iter_mut().zip(&x) {
                *h += usize::from(xi);
            }
        }
        let se = (pi * (1.0 - pi) / reps as f64).sqrt();
        for (i, h) in hits.iter().enumerate() {
            let freq = *h as f64 / reps as f64;
            assert!((freq - pi).abs() <= 4.0 * se, "unit {i}: frequency {freq}");
        }
    }

    #[test]
    fn complete_design_always_treats_exactly_k() {
        let design = Design::complete(2);
        let mut rng = replicate_rng(12, 0);
        for _ in 0..200 {
            let x = sample_assignment(&design, 4, &mut rng).unwrap();
            assert_eq!(x.iter().map(|&v| usize::from(v)).sum::<usize>(), 2);
        }
    }

    #[test]
    fn cluster_design_moves_clusters_wholesale() {
        let design = Design::cluster(vec![7, 7, 3, 3], 0.5).unwrap();
        let mut rng = replicate_rng(13, 0);
        for _ in 0..200 {
            let x = sample_assignment(&design, 4, &mut rng).unwrap();
            assert_eq!(x[0], x[1]);
            assert_eq!(x[2], x[3]);
        }
    }

    #[test]
    fn probability_hand_values() {
        let b = Design::bernoulli_uniform(3, 0.5).unwrap();
        for x in enumerate_assignments(3).unwrap() {
            assert!((assignment_probability(&b, &x).unwrap() - 0.125).abs() < 1e-15);
        }
        let c = Design::complete(2);
        let p = assignment_probability(&c, &[1, 1, 0, 0]).unwrap();
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(assignment_probability(&c, &[1, 0, 0, 0]).unwrap(), 0.0);
        let cl = Design::cluster(vec![0, 0, 1, 1], 0.3).unwrap();
        assert_eq!(assignment_probability(&cl, &[1, 0, 0, 0]).unwrap(), 0.0);
        let p = assignment_probability(&cl, &[1, 1, 0, 0]).unwrap();
        assert!((p - 0.3 * 0.7).abs() < 1e-15);
        assert!(assignment_probability(&b, &[0, 1, 2]).is_err());
    }

    #[test]
    fn enumeration_order_and_cap() {
        let xs = enumerate_assignments(2).unwrap();
        assert_eq!(xs, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let xs = enumerate_assignments(3).unwrap();
        assert_eq!(xs.len(), 8);
        let unique: std::collections::HashSet<_> = xs.iter().collect();
        assert_eq!(unique.len(), 8);
        assert!(matches!(enumerate_assignments(21), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn probabilities_sum_to_one_over_enumeration() {
        let designs: Vec<(Design, usize)> = vec![
            (Design::bernoulli_uniform(3, 0.3).unwrap(), 3),
            (
                Design::bernoulli(vec![
                    0.17, 0.42, 0.93, 0.5, 0.08, 0.66, 0.31, 0.74, 0.25, 0.6, 0.11, 0.99,
                ])
                .unwrap(),
                12,
            ),
            (Design::complete(5), 12),
            (Design::complete(0), 4),
            (Design::cluster(vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5], 0.4).unwrap(), 12),
        ];
        for (design, n) in designs {
            let total: f64 = enumerate_assignments(n)
                .unwrap()
                .iter()
                .map(|x| assignment_probability(&design, x).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{design:?}: total {total}");
        }
    }

    #[test]
    fn empirical_assignment_frequencies_match_probabilities() {
        // n <= 6: compare the empirical multinomial over enumerated
        // assignments with the exact probabilities, within 4 SEs per cell.
        let n = 5usize;
        let designs = vec![
            Design::bernoulli(vec![0.2, 0.8, 0.5, 0.35, 0.6]).unwrap(),
            Design::complete(2),
            Design::cluster(vec![0, 0, 1, 1, 2], 0.45).unwrap(),
        ];
        let reps = 100_000usize;
        for (d_idx, design) in designs.iter().enumerate() {
            let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
            let mut rng = replicate_rng(14, d_idx as u64);
            for _ in 0..reps {
                *counts.entry(sample_assignment(design, n, &mut rng).unwrap()).or_default() += 1;
            }
            for x in enumerate_assignments(n).unwrap() {
                let p = assignment_probability(design, &x).unwrap();
                let freq = counts.get(&x).copied().unwrap_or(0) as f64 / reps as f64;
                let se = (p * (1.0 - p) / reps as f64).sqrt();
                assert!(
                    (freq - p).abs() <= 4.0 * se.max(1e-12),
                    "design {d_idx}, x {x:?}: freq {freq} vs p {p}"
                );
            }
        }
    }

    #[test]
    fn binomial_coefficient_values() {
        assert_eq!(binomial_coefficient(4, 2), 6.0);
        assert_eq!(binomial_coefficient(20, 10), 184_756.0);
        assert_eq!(binomial_coefficient(5, 0), 1.0);
        assert_eq!(binomial_coefficient(3, 5), 0.0);
    }
}
