//! Classification on top of the sparse circuit: closed-form class
//! probabilities, simulated measurement sampling, and the
//! neighbour-sampling retrieval variant.
//!
//! All sampling is seeded and uses inverse-CDF over exact outcome
//! probabilities laid out in canonical (class-major) order, so results
//! are reproducible bit for bit and independent of training-set order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pattern::{BinaryPattern, ClassLabel, TrainingSet};
use crate::sparse::{check_epsilon, phase_slope, SparseQState, POSTSELECTION_EPSILON};

/// Per-class probabilities conditioned on a successful ancilla
/// postselection.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassDistribution {
    probabilities: Vec<f64>,
    p_ancilla_zero: f64,
}

impl ClassDistribution {
    fn new(probabilities: Vec<f64>, p_ancilla_zero: f64) -> Self {
        debug_assert!(!probabilities.is_empty());
        Self { probabilities, p_ancilla_zero }
    }

    /// One entry per class label, in label order; sums to 1.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, label: ClassLabel) -> f64 {
        self.probabilities[label.index()]
    }

    /// The ancilla-zero probability this distribution is conditioned on.
    pub fn p_ancilla_zero(&self) -> f64 {
        self.p_ancilla_zero
    }

    /// Most probable class; ties break toward the lowest label.
    pub fn argmax(&self) -> ClassLabel {
        let mut best = 0;
        for (c, &p) in self.probabilities.iter().enumerate().skip(1) {
            if p > self.probabilities[best] {
                best = c;
            }
        }
        ClassLabel(best as u16)
    }

    /// Gap between the two largest class probabilities; the quality
    /// score of the judgement. Equals the top probability when only one
    /// class exists.
    pub fn margin(&self) -> f64 {
        let mut top = 0.0f64;
        let mut second = 0.0f64;
        for &p in &self.probabilities {
            if p > top {
                second = top;
                top = p;
            } else if p > second {
                second = p;
            }
        }
        top - second
    }
}

/// Which retrieval step turns the final superposition into a label.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RetrievalVersion {
    /// Measure the class register of repeated copies.
    ClassMeasurement,
    /// Measure the pattern register of repeated copies and take the
    /// majority class among the drawn neighbours.
    NeighbourSampling,
}

/// Knobs of a classification run.
#[derive(Clone, Copy, Debug)]
pub struct QpcConfig {
    /// Scale on the phase slope; 1 is the base algorithm.
    pub epsilon: f64,
    /// Measurement repetitions. 0 is the analytic sentinel: skip
    /// sampling and return the closed-form distribution.
    pub shots: u32,
    pub retrieval: RetrievalVersion,
    /// Neighbour draws used by `NeighbourSampling`.
    pub neighbour_samples: u32,
    pub rng_seed: u64,
}

impl Default for QpcConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            shots: 1024,
            retrieval: RetrievalVersion::ClassMeasurement,
            neighbour_samples: 11,
            rng_seed: 0,
        }
    }
}

/// Outcome of one classification run.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub predicted: ClassLabel,
    pub distribution: ClassDistribution,
    pub p_ancilla_zero: f64,
    pub shots_used: u32,
    pub postselection_failures: u32,
    /// Top-2 probability gap of `distribution`.
    pub margin: f64,
}

impl ClassificationResult {
    fn from_distribution(distribution: ClassDistribution, shots_used: u32, failures: u32) -> Self {
        Self {
            predicted: distribution.argmax(),
            p_ancilla_zero: distribution.p_ancilla_zero(),
            margin: distribution.margin(),
            shots_used,
            postselection_failures: failures,
            distribution,
        }
    }
}

/// Sum with contributions in a canonical order, so the result is
/// bitwise independent of the caller's iteration order.
fn canonical_sum(mut values: Vec<f64>) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Squared-cosine weight of every training member against the input.
fn member_weights(training: &TrainingSet, input: &BinaryPattern, epsilon: f64) -> Result<Vec<f64>> {
    training.check_input(input)?;
    check_epsilon(epsilon)?;
    let gamma = phase_slope(epsilon, training.feature_count());
    training
        .members()
        .iter()
        .map(|member| {
            let distance = input.hamming_distance(&member.pattern)? as f64;
            Ok((gamma * distance).cos().powi(2))
        })
        .collect()
}

/// Closed-form class distribution:
/// `P(c) = sum_{l in c} cos^2(gamma d_H(x, v_l)) / (N P(0_a))` with
/// `P(0_a) = (1/N) sum_p cos^2(gamma d_H(x, v_p))`.
pub fn analytic_distribution(
    training: &TrainingSet,
    input: &BinaryPattern,
    epsilon: f64,
) -> Result<ClassDistribution> {
    let weights = member_weights(training, input, epsilon)?;
    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); training.class_count()];
    for (member, &weight) in training.members().iter().zip(&weights) {
        per_class[member.label.index()].push(weight);
    }
    let class_sums: Vec<f64> = per_class.into_iter().map(canonical_sum).collect();
    let total: f64 = class_sums.iter().sum();
    let p_ancilla_zero = total / training.len() as f64;
    if p_ancilla_zero < POSTSELECTION_EPSILON {
        return Err(Error::PostselectionImpossible { probability: p_ancilla_zero });
    }
    let probabilities = class_sums.iter().map(|s| s / total).collect();
    Ok(ClassDistribution::new(probabilities, p_ancilla_zero))
}

/// Run the circuit once, then draw `shots` simulated (ancilla, class)
/// measurements from the exact final-state probabilities. Shots that
/// measure ancilla |1> are postselection failures and are discarded;
/// the surviving class frequencies form the empirical distribution.
pub fn simulate_distribution(
    training: &TrainingSet,
    input: &BinaryPattern,
    config: &QpcConfig,
) -> Result<ClassificationResult> {
    if config.shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "sampling needs at least one shot (0 is the analytic sentinel)".into(),
        });
    }
    let state = SparseQState::evolve(training, input.clone(), config.epsilon)?;

    // Exact (ancilla = 0, class) outcome masses in class order, plus the
    // lumped ancilla-1 mass. Contributions are summed canonically so the
    // masses do not depend on training-set order.
    let mut zero_contribs: Vec<Vec<f64>> = vec![Vec::new(); training.class_count()];
    let mut one_contribs: Vec<f64> = Vec::new();
    for term in state.terms() {
        let mass = term.amplitude.norm_sqr();
        if term.ancilla {
            one_contribs.push(mass);
        } else {
            zero_contribs[term.label.index()].push(mass);
        }
    }
    let class_masses: Vec<f64> = zero_contribs.into_iter().map(canonical_sum).collect();
    let failure_mass = canonical_sum(one_contribs);
    let p_ancilla_zero: f64 = class_masses.iter().sum();
    if p_ancilla_zero < POSTSELECTION_EPSILON {
        return Err(Error::PostselectionImpossible { probability: p_ancilla_zero });
    }

    let total_mass = p_ancilla_zero + failure_mass;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut counts = vec![0u64; training.class_count()];
    let mut failures = 0u32;
    for _ in 0..config.shots {
        let mut u = rng.random::<f64>() * total_mass;
        let mut outcome = None;
        for (c, &mass) in class_masses.iter().enumerate() {
            if u < mass {
                outcome = Some(c);
                break;
            }
            u -= mass;
        }
        match outcome {
            Some(c) => counts[c] += 1,
            None => failures += 1,
        }
    }

    let successes: u64 = counts.iter().sum();
    if successes == 0 {
        return Err(Error::PostselectionExhausted { shots: config.shots });
    }
    let probabilities = counts
        .iter()
        .map(|&c| c as f64 / successes as f64)
        .collect();
    Ok(ClassificationResult::from_distribution(
        ClassDistribution::new(probabilities, p_ancilla_zero),
        config.shots,
        failures,
    ))
}

/// Draw `neighbour_samples` pattern-register measurements from the
/// postselected state: member p is drawn with probability
/// `cos^2(gamma d_H(x, v_p)) / sum_q cos^2(gamma d_H(x, v_q))`.
/// Members with identical (pattern, class) are indistinguishable
/// outcomes, which is irrelevant here: every draw is recorded as its
/// class, and the majority class wins (ties toward the lowest label).
pub fn sample_neighbours(
    training: &TrainingSet,
    input: &BinaryPattern,
    config: &QpcConfig,
) -> Result<ClassificationResult> {
    if config.neighbour_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "neighbour_samples",
            reason: "at least one neighbour draw is required".into(),
        });
    }
    let weights = member_weights(training, input, config.epsilon)?;
    let p_ancilla_zero = canonical_sum(weights.clone()) / training.len() as f64;
    if p_ancilla_zero < POSTSELECTION_EPSILON {
        return Err(Error::PostselectionImpossible { probability: p_ancilla_zero });
    }

    // Outcomes are distinct measured kets (pattern register + class),
    // in canonical order so sampling ignores training-set order.
    let mut outcomes: BTreeMap<(ClassLabel, Vec<u64>), Vec<f64>> = BTreeMap::new();
    for (member, &weight) in training.members().iter().zip(&weights) {
        outcomes
            .entry((member.label, member.pattern.words().to_vec()))
            .or_default()
            .push(weight);
    }
    let outcome_masses: Vec<(ClassLabel, f64)> = outcomes
        .into_iter()
        .map(|((label, _), contribs)| (label, canonical_sum(contribs)))
        .collect();
    let total_weight: f64 = outcome_masses.iter().map(|(_, w)| w).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut counts = vec![0u64; training.class_count()];
    for _ in 0..config.neighbour_samples {
        let mut u = rng.random::<f64>() * total_weight;
        let mut drawn = outcome_masses.len() - 1;
        for (i, (_, mass)) in outcome_masses.iter().enumerate() {
            if u < *mass {
                drawn = i;
                break;
            }
            u -= mass;
        }
        counts[outcome_masses[drawn].0.index()] += 1;
    }

    let probabilities = counts
        .iter()
        .map(|&c| c as f64 / config.neighbour_samples as f64)
        .collect();
    Ok(ClassificationResult::from_distribution(
        ClassDistribution::new(probabilities, p_ancilla_zero),
        config.neighbour_samples,
        0,
    ))
}

/// Dispatch on the configured mode: `shots == 0` returns the analytic
/// argmax, otherwise the configured retrieval version runs.
pub fn classify(
    training: &TrainingSet,
    input: &BinaryPattern,
    config: &QpcConfig,
) -> Result<ClassificationResult> {
    if config.shots == 0 {
        let distribution = analytic_distribution(training, input, config.epsilon)?;
        return Ok(ClassificationResult::from_distribution(distribution, 0, 0));
    }
    match config.retrieval {
        RetrievalVersion::ClassMeasurement => simulate_distribution(training, input, config),
        RetrievalVersion::NeighbourSampling => sample_neighbours(training, input, config),
    }
}
