//! Sparse superposition simulator for the classification circuit.
//!
//! The state after every step of the circuit has at most 2N nonzero
//! basis amplitudes (one per training member and ancilla branch), so it
//! is represented as a term list instead of a 2^m vector. The shared
//! input register is stored once on the state; no gate touches it after
//! the match-encoding step.
//!
//! Gates must be applied in the fixed circuit order, tracked by
//! [`Stage`]; applying one out of order is a programming error and is
//! rejected, never silently misapplied.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pattern::{BinaryPattern, ClassLabel, TrainingSet};

/// Complex probability amplitude.
pub type ComplexAmplitude = Complex64;

/// Tolerance below which the ancilla-zero probability counts as zero and
/// postselection is impossible.
pub const POSTSELECTION_EPSILON: f64 = 1e-15;

/// Position of a state in the fixed circuit order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stage {
    /// Uniform superposition over training members, ancilla |0>.
    Prepared,
    /// Ancilla sent through the first Hadamard.
    AncillaSplit,
    /// Second register rewritten to the per-qubit match bits.
    MatchesEncoded,
    /// Distance-dependent phases written by the diagonal unitary.
    PhaseApplied,
    /// Final ancilla Hadamard applied; phases turned into magnitudes.
    Interfered,
    /// Conditioned on ancilla |0> and renormalized.
    PostSelected,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One nonzero basis amplitude. `(pattern_index, ancilla)` uniquely
/// identifies a term within a state; duplicate training patterns keep
/// their own terms.
#[derive(Clone, Debug)]
pub struct SparseTerm {
    /// Index of the originating member in the training set.
    pub pattern_index: usize,
    /// Second register: the training pattern verbatim before match
    /// encoding, the per-qubit match bits (1 = agree) after.
    pub d_register: BinaryPattern,
    pub label: ClassLabel,
    pub ancilla: bool,
    pub amplitude: ComplexAmplitude,
}

/// Superposition over training members at a definite circuit stage.
#[derive(Clone, Debug)]
pub struct SparseQState {
    input: BinaryPattern,
    terms: Vec<SparseTerm>,
    stage: Stage,
    class_count: usize,
}

impl SparseQState {
    /// Build the initial superposition: every training member with
    /// amplitude 1/sqrt(N), ancilla |0>, second register holding the
    /// pattern verbatim.
    pub fn prepare(training: &TrainingSet, input: BinaryPattern) -> Result<Self> {
        training.check_input(&input)?;
        let amp = Complex64::new(1.0 / (training.len() as f64).sqrt(), 0.0);
        let terms = training
            .members()
            .iter()
            .enumerate()
            .map(|(pattern_index, member)| SparseTerm {
                pattern_index,
                d_register: member.pattern.clone(),
                label: member.label,
                ancilla: false,
                amplitude: amp,
            })
            .collect();
        Ok(Self {
            input,
            terms,
            stage: Stage::Prepared,
            class_count: training.class_count(),
        })
    }

    /// Hadamard on the ancilla qubit. Valid at `Prepared` (splits each
    /// term into both ancilla branches) and at `PhaseApplied` (merges
    /// the branches, turning phase differences into magnitudes).
    ///
    /// Terms stay sorted by (pattern_index, ancilla): the split path
    /// emits both branches of a member adjacently, and the merge path
    /// relies on that adjacency.
    pub fn hadamard_ancilla(mut self) -> Result<Self> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        match self.stage {
            Stage::Prepared => {
                let mut terms = Vec::with_capacity(2 * self.terms.len());
                for term in std::mem::take(&mut self.terms) {
                    debug_assert!(!term.ancilla);
                    let amplitude = term.amplitude * inv_sqrt2;
                    let twin = SparseTerm {
                        d_register: term.d_register.clone(),
                        ancilla: true,
                        amplitude,
                        ..term
                    };
                    terms.push(SparseTerm { amplitude, ..term });
                    terms.push(twin);
                }
                self.terms = terms;
                self.stage = Stage::AncillaSplit;
            }
            Stage::PhaseApplied => {
                debug_assert_eq!(self.terms.len() % 2, 0);
                for pair in self.terms.chunks_exact_mut(2) {
                    debug_assert_eq!(pair[0].pattern_index, pair[1].pattern_index);
                    debug_assert!(!pair[0].ancilla && pair[1].ancilla);
                    let zero = pair[0].amplitude;
                    let one = pair[1].amplitude;
                    pair[0].amplitude = (zero + one) * inv_sqrt2;
                    pair[1].amplitude = (zero - one) * inv_sqrt2;
                }
                self.stage = Stage::Interfered;
            }
            actual => return Err(Error::WrongStage { op: "hadamard_ancilla", actual }),
        }
        Ok(self)
    }

    /// Rewrite each term's second register to the per-qubit match bits:
    /// bit k becomes 1 iff the input and the pattern agree at k
    /// (a controlled-NOT computing XOR, then an X flipping every bit).
    /// Amplitudes are untouched.
    pub fn encode_matches(mut self) -> Result<Self> {
        if self.stage != Stage::AncillaSplit {
            return Err(Error::WrongStage { op: "encode_matches", actual: self.stage });
        }
        let input = &self.input;
        for term in &mut self.terms {
            term.d_register.apply_match_mask(input)?;
        }
        self.stage = Stage::MatchesEncoded;
        Ok(self)
    }

    /// Diagonal unitary writing the Hamming distance into the phases:
    /// the term for pattern p on ancilla branch a picks up
    /// `exp(-i * (-1)^a * gamma * d_H)` with `gamma = epsilon * pi / (2n)`
    /// and `d_H` the number of zero bits in the match register (the
    /// Hamming distance between input and pattern). Magnitudes are
    /// unchanged; after the final Hadamard the ancilla-zero amplitude of
    /// pattern p is proportional to `cos(gamma * d_H)`, maximal for an
    /// exact match.
    pub fn apply_phase_unitary(mut self, epsilon: f64) -> Result<Self> {
        if self.stage != Stage::MatchesEncoded {
            return Err(Error::WrongStage { op: "apply_phase_unitary", actual: self.stage });
        }
        check_epsilon(epsilon)?;
        let n = self.input.len();
        let gamma = phase_slope(epsilon, n);
        for term in &mut self.terms {
            let distance = (n as u32 - term.d_register.count_ones()) as f64;
            let sign = if term.ancilla { 1.0 } else { -1.0 };
            term.amplitude *= Complex64::from_polar(1.0, sign * gamma * distance);
        }
        self.stage = Stage::PhaseApplied;
        Ok(self)
    }

    /// Condition on measuring the ancilla in |0>: returns the
    /// renormalized ancilla-zero state and the probability of that
    /// outcome. After the full circuit the probability equals
    /// `(1/N) * sum_p cos^2(gamma * d_H(x, v_p))`.
    pub fn postselect_ancilla_zero(mut self) -> Result<(Self, f64)> {
        if self.stage != Stage::Interfered {
            return Err(Error::WrongStage { op: "postselect_ancilla_zero", actual: self.stage });
        }
        let probability = self.p_ancilla_zero();
        if probability < POSTSELECTION_EPSILON {
            return Err(Error::PostselectionImpossible { probability });
        }
        let scale = 1.0 / probability.sqrt();
        self.terms.retain(|term| !term.ancilla);
        for term in &mut self.terms {
            term.amplitude *= scale;
        }
        self.stage = Stage::PostSelected;
        Ok((self, probability))
    }

    /// Run the full circuit: prepare, ancilla Hadamard, match encoding,
    /// phase unitary, final ancilla Hadamard.
    pub fn evolve(training: &TrainingSet, input: BinaryPattern, epsilon: f64) -> Result<Self> {
        SparseQState::prepare(training, input)?
            .hadamard_ancilla()?
            .encode_matches()?
            .apply_phase_unitary(epsilon)?
            .hadamard_ancilla()
    }

    pub fn input(&self) -> &BinaryPattern {
        &self.input
    }

    pub fn terms(&self) -> &[SparseTerm] {
        &self.terms
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Total squared magnitude; 1 at every stage within rounding.
    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    /// Probability mass on the ancilla-zero branches.
    pub fn p_ancilla_zero(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.ancilla)
            .map(|t| t.amplitude.norm_sqr())
            .sum()
    }

    /// Test-only escape hatch for driving gates out of order.
    #[cfg(test)]
    pub(crate) fn force_stage(&mut self, stage: Stage) {
        self.stage = stage;
    }

    /// Test-only direct construction from raw terms.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(
        input: BinaryPattern,
        terms: Vec<SparseTerm>,
        stage: Stage,
        class_count: usize,
    ) -> Self {
        Self { input, terms, stage, class_count }
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must be a positive finite real, got {epsilon}"),
        });
    }
    Ok(())
}

/// Phase slope `gamma = epsilon * pi / (2n)`.
pub fn phase_slope(epsilon: f64, feature_count: usize) -> f64 {
    epsilon * std::f64::consts::FRAC_PI_2 / feature_count as f64
}
