//! Classical comparison classifiers under the Hamming metric: plain
//! k-nearest-neighbour majority vote, distance-weighted kNN, and the
//! nearest-class-centroid rule.

use crate::error::{Error, Result};
use crate::pattern::{BinaryPattern, ClassLabel, TrainingSet};
use crate::sparse::phase_slope;

/// Vote weight as a function of Hamming distance.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Weighting {
    /// Every neighbour counts the same.
    Uniform,
    /// 1 / (1 + d_H), a conventional inverse-distance falloff.
    InverseDistance,
    /// cos^2(pi d_H / (2n)); with k = N this reproduces the quantum
    /// classifier's analytic ranking at epsilon = 1.
    CosineSquared,
}

#[derive(Clone, Copy, Debug)]
pub struct BaselineConfig {
    pub k: usize,
    pub weighting: Weighting,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { k: 5, weighting: Weighting::Uniform }
    }
}

/// The k Hamming-nearest members, distance ties at the boundary broken
/// by the lower member index.
fn nearest_members(
    training: &TrainingSet,
    input: &BinaryPattern,
    k: usize,
) -> Result<Vec<(u32, usize)>> {
    training.check_input(input)?;
    if k == 0 || k > training.len() {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("must be in 1..={}, got {k}", training.len()),
        });
    }
    let mut by_distance: Vec<(u32, usize)> = training
        .members()
        .iter()
        .enumerate()
        .map(|(index, member)| Ok((input.hamming_distance(&member.pattern)?, index)))
        .collect::<Result<_>>()?;
    by_distance.sort_unstable();
    by_distance.truncate(k);
    Ok(by_distance)
}

fn argmax_class(scores: &[f64]) -> ClassLabel {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = c;
        }
    }
    ClassLabel(best as u16)
}

/// Majority vote among the k nearest members; label ties break toward
/// the lowest label.
pub fn knn_classify(
    training: &TrainingSet,
    input: &BinaryPattern,
    config: &BaselineConfig,
) -> Result<ClassLabel> {
    let mut votes = vec![0.0f64; training.class_count()];
    for (_, index) in nearest_members(training, input, config.k)? {
        votes[training.members()[index].label.index()] += 1.0;
    }
    Ok(argmax_class(&votes))
}

/// Weighted vote among the k nearest members.
pub fn weighted_knn_classify(
    training: &TrainingSet,
    input: &BinaryPattern,
    config: &BaselineConfig,
) -> Result<ClassLabel> {
    let n = training.feature_count();
    let gamma = phase_slope(1.0, n);
    let mut scores = vec![0.0f64; training.class_count()];
    for (distance, index) in nearest_members(training, input, config.k)? {
        let weight = match config.weighting {
            Weighting::Uniform => 1.0,
            Weighting::InverseDistance => 1.0 / (1.0 + distance as f64),
            Weighting::CosineSquared => (gamma * distance as f64).cos().powi(2),
        };
        scores[training.members()[index].label.index()] += weight;
    }
    Ok(argmax_class(&scores))
}

/// Nearest class centroid: per class, the real-valued mean of its
/// members; the input goes to the class whose mean is closest in
/// Euclidean distance. Classes without members are skipped; ties break
/// toward the lowest label.
pub fn centroid_classify(training: &TrainingSet, input: &BinaryPattern) -> Result<ClassLabel> {
    training.check_input(input)?;
    let n = training.feature_count();
    let d = training.class_count();
    let mut sums = vec![vec![0.0f64; n]; d];
    let mut counts = vec![0usize; d];
    for member in training.members() {
        let c = member.label.index();
        counts[c] += 1;
        for (k, bit) in member.pattern.iter_bits().enumerate() {
            if bit {
                sums[c][k] += 1.0;
            }
        }
    }

    let mut best: Option<(f64, usize)> = None;
    for c in 0..d {
        if counts[c] == 0 {
            continue;
        }
        let inv = 1.0 / counts[c] as f64;
        let mut dist_sqr = 0.0;
        for (k, bit) in input.iter_bits().enumerate() {
            let delta = (bit as u8 as f64) - sums[c][k] * inv;
            dist_sqr += delta * delta;
        }
        if best.map_or(true, |(b, _)| dist_sqr < b) {
            best = Some((dist_sqr, c));
        }
    }
    // counts cannot be all zero: the training set is non-empty.
    Ok(ClassLabel(best.unwrap().1 as u16))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::analytic_distribution;
    use crate::pattern::LabeledPattern;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pat(s: &str) -> BinaryPattern {
        s.parse().unwrap()
    }

    fn set(patterns: &[(&str, u16)], class_count: usize) -> TrainingSet {
        TrainingSet::new(
            patterns
                .iter()
                .map(|(p, c)| LabeledPattern { pattern: pat(p), label: ClassLabel(*c) })
                .collect(),
            class_count,
        )
        .unwrap()
    }

    #[test]
    fn knn_exact_duplicate_wins_at_k1() {
        let training = set(&[("0101", 2), ("1111", 0)], 3);
        let config = BaselineConfig { k: 1, ..BaselineConfig::default() };
        assert_eq!(knn_classify(&training, &pat("0101"), &config).unwrap(), ClassLabel(2));
    }

    #[test]
    fn knn_k_equals_n_returns_largest_class() {
        // The degenerate case: with every member voting, the most
        // populous class always wins.
        let training = set(
            &[("0000", 1), ("0011", 1), ("1100", 1), ("1111", 0), ("0110", 0)],
            2,
        );
        let config = BaselineConfig { k: training.len(), ..BaselineConfig::default() };
        for input in ["0000", "1111", "0101"] {
            assert_eq!(
                knn_classify(&training, &pat(input), &config).unwrap(),
                ClassLabel(1)
            );
        }
    }

    #[test]
    fn knn_majority_beats_single_closer_member() {
        let training = set(&[("0001", 0), ("0010", 0), ("0000", 1)], 2);
        let config = BaselineConfig { k: 3, ..BaselineConfig::default() };
        assert_eq!(knn_classify(&training, &pat("0000"), &config).unwrap(), ClassLabel(0));
    }

    #[test]
    fn knn_duplicate_of_input_at_index_zero_forces_prediction() {
        let training = set(&[("0110", 1), ("0110", 0), ("1001", 0)], 2);
        let config = BaselineConfig { k: 1, ..BaselineConfig::default() };
        assert_eq!(knn_classify(&training, &pat("0110"), &config).unwrap(), ClassLabel(1));
    }

    #[test]
    fn knn_rejects_oversized_k() {
        let training = set(&[("01", 0)], 1);
        let config = BaselineConfig { k: 2, ..BaselineConfig::default() };
        assert!(matches!(
            knn_classify(&training, &pat("01"), &config),
            Err(Error::InvalidParameter { name: "k", .. })
        ));
    }

    #[test]
    fn weighted_single_neighbour_is_its_label() {
        let training = set(&[("0101", 1), ("1010", 0)], 2);
        for weighting in [Weighting::Uniform, Weighting::InverseDistance, Weighting::CosineSquared] {
            let config = BaselineConfig { k: 1, weighting };
            assert_eq!(
                weighted_knn_classify(&training, &pat("0101"), &config).unwrap(),
                ClassLabel(1)
            );
        }
    }

    #[test]
    fn weighted_cosine_zero_weights_cannot_outvote() {
        // One class-0 member at distance 0 against two class-1 members
        // at distance n: the far members carry weight cos^2(pi/2) = 0.
        let training = set(&[("0101", 0), ("1010", 1), ("1010", 1)], 2);
        let config = BaselineConfig { k: 3, weighting: Weighting::CosineSquared };
        assert_eq!(
            weighted_knn_classify(&training, &pat("0101"), &config).unwrap(),
            ClassLabel(0)
        );
    }

    #[test]
    fn weighted_cosine_full_vote_matches_quantum_argmax() {
        // The classical / quantum bridge: cosine-squared weighting over
        // the whole training set ranks classes by exactly the sums the
        // analytic distribution normalizes.
        let mut rng = StdRng::seed_from_u64(61);
        let mut checked = 0;
        while checked < 400 {
            let n = rng.random_range(1..=10usize);
            let count = rng.random_range(1..=30usize);
            let d = rng.random_range(1..=4usize);
            let members: Vec<LabeledPattern> = (0..count)
                .map(|_| LabeledPattern {
                    pattern: BinaryPattern::from_fn(n, |_| rng.random()).unwrap(),
                    label: ClassLabel(rng.random_range(0..d) as u16),
                })
                .collect();
            let training = TrainingSet::new(members, d).unwrap();
            let input = BinaryPattern::from_fn(n, |_| rng.random()).unwrap();

            let analytic = match analytic_distribution(&training, &input, 1.0) {
                Ok(dist) => dist,
                Err(_) => continue,
            };
            // Skip near-ties: the two routes may then differ in the
            // last ulp and legitimately disagree.
            if analytic.margin() < 1e-9 {
                continue;
            }
            let config = BaselineConfig { k: training.len(), weighting: Weighting::CosineSquared };
            let classical = weighted_knn_classify(&training, &input, &config).unwrap();
            assert_eq!(classical, analytic.argmax());
            checked += 1;
        }
    }

    #[test]
    fn centroid_single_class_is_trivial() {
        let training = set(&[("0101", 0), ("1010", 0)], 1);
        assert_eq!(centroid_classify(&training, &pat("1111")).unwrap(), ClassLabel(0));
    }

    #[test]
    fn centroid_exact_centroid_match() {
        let training = set(&[("00", 0), ("11", 1)], 2);
        assert_eq!(centroid_classify(&training, &pat("00")).unwrap(), ClassLabel(0));
    }

    #[test]
    fn centroid_mean_vector_arithmetic() {
        // Class 0 mean is (0, 0.5): distance to input 01 is 0.5, closer
        // than class 1's mean (1, 1) at distance 1.
        let training = set(&[("00", 0), ("01", 0), ("11", 1)], 2);
        assert_eq!(centroid_classify(&training, &pat("01")).unwrap(), ClassLabel(0));
    }

    #[test]
    fn centroid_skips_empty_classes() {
        // Class 1 has no members; prediction falls to a populated class.
        let training = set(&[("0011", 0), ("1100", 2)], 3);
        assert_eq!(centroid_classify(&training, &pat("0011")).unwrap(), ClassLabel(0));
        assert_eq!(centroid_classify(&training, &pat("1100")).unwrap(), ClassLabel(2));
    }

    #[test]
    fn classifiers_invariant_under_member_order_without_ties() {
        let members = [("00110", 0u16), ("11001", 1), ("00011", 0), ("11110", 1)];
        let mut reversed_members = members;
        reversed_members.reverse();
        let forward = set(&members, 2);
        let reversed = set(&reversed_members, 2);
        let input = pat("00010");
        let config = BaselineConfig { k: 3, weighting: Weighting::InverseDistance };
        assert_eq!(
            knn_classify(&forward, &input, &config).unwrap(),
            knn_classify(&reversed, &input, &config).unwrap()
        );
        assert_eq!(
            weighted_knn_classify(&forward, &input, &config).unwrap(),
            weighted_knn_classify(&reversed, &input, &config).unwrap()
        );
        assert_eq!(
            centroid_classify(&forward, &input).unwrap(),
            centroid_classify(&reversed, &input).unwrap()
        );
    }
}
