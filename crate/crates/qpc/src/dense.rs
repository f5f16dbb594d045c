//! Brute-force full state-vector simulator: the ground truth the sparse
//! representation is validated against.
//!
//! Every gate is applied literally to all 2^m amplitudes, with no
//! sparsity shortcut; the diagonal unitary is applied through its
//! per-basis-state eigenvalues (zero count of the match register times
//! the ancilla sign), never through an explicit matrix. Capped at 22
//! qubits; this simulator exists for desk-scale validation only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pattern::{BinaryPattern, TrainingSet};
use crate::sparse::{check_epsilon, phase_slope};

/// Hard cap on total qubit count.
pub const QUBIT_CAP: usize = 22;

/// Bit-position map of the full register file, least significant first:
///
/// ```text
/// bit 0                      ancilla
/// bits 1 .. 1+c              class register (c = ceil(log2 d) qubits)
/// bits 1+c .. 1+c+n          second register (pattern, then match bits)
/// bits 1+c+n .. 1+c+2n       input register
/// ```
///
/// Class values that pad d up to a power of two are never populated.
#[derive(Clone, Copy, Debug)]
pub struct RegisterLayout {
    feature_count: usize,
    class_bits: u32,
}

impl RegisterLayout {
    pub fn new(feature_count: usize, class_count: usize) -> Result<Self> {
        let class_bits = usize::BITS - (class_count - 1).leading_zeros();
        let layout = Self { feature_count, class_bits };
        let required = layout.total_qubits();
        if required > QUBIT_CAP {
            return Err(Error::QubitCapExceeded { required, cap: QUBIT_CAP });
        }
        Ok(layout)
    }

    pub fn total_qubits(&self) -> usize {
        2 * self.feature_count + self.class_bits as usize + 1
    }

    pub fn ancilla_mask(&self) -> usize {
        1
    }

    pub fn class_shift(&self) -> u32 {
        1
    }

    pub fn d_register_shift(&self) -> u32 {
        1 + self.class_bits
    }

    pub fn input_shift(&self) -> u32 {
        1 + self.class_bits + self.feature_count as u32
    }

    fn register_mask(&self) -> usize {
        (1usize << self.feature_count) - 1
    }

    /// Value of the second register in a basis index.
    pub fn d_register_of(&self, index: usize) -> usize {
        index >> self.d_register_shift() & self.register_mask()
    }

    /// Value of the class register in a basis index.
    pub fn class_of(&self, index: usize) -> usize {
        index >> self.class_shift() & ((1usize << self.class_bits) - 1)
    }

    pub fn basis_index(&self, input: usize, d_register: usize, class: usize, ancilla: bool) -> usize {
        input << self.input_shift()
            | d_register << self.d_register_shift()
            | class << self.class_shift()
            | ancilla as usize
    }
}

fn pattern_bits(pattern: &BinaryPattern) -> usize {
    pattern
        .iter_bits()
        .enumerate()
        .fold(0usize, |acc, (k, bit)| acc | (bit as usize) << k)
}

/// Full 2^m amplitude vector over input, second register, class and
/// ancilla.
#[derive(Clone, Debug)]
pub struct DenseQState {
    amplitudes: Vec<Complex64>,
    layout: RegisterLayout,
    input_bits: usize,
    /// Per training member: (pattern bits, class value).
    member_kets: Vec<(usize, usize)>,
    matches_encoded: bool,
}

impl DenseQState {
    /// Initial state: amplitude 1/sqrt(N) on each member ket
    /// |x; v_p, c_p; 0>. Duplicate (pattern, class) members would pile
    /// amplitude onto one ket and denormalize the superposition, so
    /// they are rejected.
    pub fn prepare(training: &TrainingSet, input: &BinaryPattern) -> Result<Self> {
        training.check_input(input)?;
        let layout = RegisterLayout::new(training.feature_count(), training.class_count())?;

        let member_kets: Vec<(usize, usize)> = training
            .members()
            .iter()
            .map(|m| (pattern_bits(&m.pattern), m.label.index()))
            .collect();
        for (second, ket) in member_kets.iter().enumerate() {
            if let Some(first) = member_kets[..second].iter().position(|k| k == ket) {
                return Err(Error::DuplicateTrainingKet { first, second });
            }
        }

        let input_bits = pattern_bits(input);
        let mut amplitudes = vec![Complex64::ZERO; 1 << layout.total_qubits()];
        let amp = Complex64::new(1.0 / (training.len() as f64).sqrt(), 0.0);
        for &(pattern, class) in &member_kets {
            amplitudes[layout.basis_index(input_bits, pattern, class, false)] = amp;
        }
        Ok(Self {
            amplitudes,
            layout,
            input_bits,
            member_kets,
            matches_encoded: false,
        })
    }

    /// Hadamard on the ancilla qubit.
    pub fn hadamard_ancilla(mut self) -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for index in (0..self.amplitudes.len()).step_by(2) {
            let zero = self.amplitudes[index];
            let one = self.amplitudes[index | 1];
            self.amplitudes[index] = (zero + one) * inv_sqrt2;
            self.amplitudes[index | 1] = (zero - one) * inv_sqrt2;
        }
        self
    }

    /// For every feature k: controlled-NOT from input qubit k onto
    /// second-register qubit k, then X on second-register qubit k.
    pub fn encode_matches(mut self) -> Self {
        for k in 0..self.layout.feature_count {
            let control = 1usize << (self.layout.input_shift() + k as u32);
            let target = 1usize << (self.layout.d_register_shift() + k as u32);
            // cNOT: swap the target pair wherever the control is set.
            for index in 0..self.amplitudes.len() {
                if index & control != 0 && index & target == 0 {
                    self.amplitudes.swap(index, index | target);
                }
            }
            // X: unconditional flip of the target qubit.
            for index in 0..self.amplitudes.len() {
                if index & target == 0 {
                    self.amplitudes.swap(index, index | target);
                }
            }
        }
        self.matches_encoded = true;
        self
    }

    /// Diagonal unitary applied from its eigenvalues: basis state with z
    /// zero bits in the second register and ancilla a picks up
    /// `exp(-i * gamma * z * (-1)^a)`.
    pub fn apply_phase_unitary(mut self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let gamma = phase_slope(epsilon, self.layout.feature_count);
        let n = self.layout.feature_count as u32;
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let zeros = (n - (self.layout.d_register_of(index) as u64).count_ones()) as f64;
            let sign = if index & 1 == 1 { 1.0 } else { -1.0 };
            *amp *= Complex64::from_polar(1.0, sign * gamma * zeros);
        }
        Ok(self)
    }

    /// Run the whole circuit and return the final state.
    pub fn run(training: &TrainingSet, input: &BinaryPattern, epsilon: f64) -> Result<Self> {
        Ok(Self::prepare(training, input)?
            .hadamard_ancilla()
            .encode_matches()
            .apply_phase_unitary(epsilon)?
            .hadamard_ancilla())
    }

    /// Amplitude of the basis state carrying training member
    /// `pattern_index` on the given ancilla branch. Before match
    /// encoding the member ket holds the pattern verbatim; afterwards it
    /// holds the match bits.
    pub fn amplitude_for(&self, pattern_index: usize, ancilla: bool) -> Result<Complex64> {
        let &(pattern, class) = self
            .member_kets
            .get(pattern_index)
            .ok_or(Error::IndexOutOfRange {
                index: pattern_index,
                len: self.member_kets.len(),
            })?;
        let second = if self.matches_encoded {
            // Match bits: NOT(x XOR v), masked to n bits.
            !(self.input_bits ^ pattern) & self.layout.register_mask()
        } else {
            pattern
        };
        Ok(self.amplitudes[self.layout.basis_index(self.input_bits, second, class, ancilla)])
    }

    /// Raw amplitude by basis index.
    pub fn amplitude_at(&self, index: usize) -> Result<Complex64> {
        self.amplitudes
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange { index, len: self.amplitudes.len() })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn p_ancilla_zero(&self) -> f64 {
        self.amplitudes
            .iter()
            .step_by(2)
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Probability of measuring class `c` conditioned on ancilla |0>.
    pub fn class_probability_given_zero(&self, class: usize) -> f64 {
        let p_zero = self.p_ancilla_zero();
        let mass: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(index, _)| index & 1 == 0 && self.layout.class_of(*index) == class)
            .map(|(_, amp)| amp.norm_sqr())
            .sum();
        mass / p_zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{ClassLabel, LabeledPattern};

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
    fn layout_bit_positions() {
        let layout = RegisterLayout::new(3, 3).unwrap();
        assert_eq!(layout.total_qubits(), 2 * 3 + 2 + 1);
        assert_eq!(layout.class_shift(), 1);
        assert_eq!(layout.d_register_shift(), 3);
        assert_eq!(layout.input_shift(), 6);
        let index = layout.basis_index(0b101, 0b011, 2, true);
        assert_eq!(layout.d_register_of(index), 0b011);
        assert_eq!(layout.class_of(index), 2);
        assert_eq!(index & 1, 1);
    }

    #[test]
    fn single_class_needs_no_class_qubits() {
        let layout = RegisterLayout::new(2, 1).unwrap();
        assert_eq!(layout.total_qubits(), 5);
    }

    #[test]
    fn qubit_cap_enforced() {
        // n = 11, d = 2 needs 2*11 + 1 + 1 = 24 qubits.
        assert!(matches!(
            RegisterLayout::new(11, 2),
            Err(Error::QubitCapExceeded { required: 24, cap: QUBIT_CAP })
        ));
    }

    #[test]
    fn identical_pattern_gives_certain_postselection() {
        let state = DenseQState::run(&set(&[("0", 0)], 1), &pat("0"), 1.0).unwrap();
        assert!((state.p_ancilla_zero() - 1.0).abs() < 1e-12);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_pattern_instance_closed_form() {
        // n=2, input 00, patterns {01 class 0, 11 class 1}:
        // P(0_a) = 0.25 and all conditional mass on class 0 -- the same
        // numbers the closed form gives, computed here from raw
        // amplitudes.
        let state = DenseQState::run(&set(&[("01", 0), ("11", 1)], 2), &pat("00"), 1.0).unwrap();
        assert!((state.p_ancilla_zero() - 0.25).abs() < 1e-12);
        assert!((state.class_probability_given_zero(0) - 1.0).abs() < 1e-12);
        assert!(state.class_probability_given_zero(1).abs() < 1e-12);
        // Member 0 sits at distance 1: |amplitude| = cos(pi/4)/sqrt(2) = 0.5.
        let amp = state.amplitude_for(0, false).unwrap();
        assert!((amp.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn prepared_state_amplitudes() {
        let training = set(&[("00", 0), ("01", 0), ("10", 1), ("11", 1)], 2);
        let state = DenseQState::prepare(&training, &pat("00")).unwrap();
        for p in 0..4 {
            let amp = state.amplitude_for(p, false).unwrap();
            assert!((amp - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            assert!(state.amplitude_for(p, true).unwrap().norm() < 1e-15);
        }
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitarity_through_every_gate() {
        let training = set(&[("011", 0), ("101", 1), ("000", 2)], 3);
        let state = DenseQState::prepare(&training, &pat("010")).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let state = state.hadamard_ancilla();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let state = state.encode_matches();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let state = state.apply_phase_unitary(1.0).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        let state = state.hadamard_ancilla();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unpopulated_basis_states_stay_exactly_zero() {
        let training = set(&[("011", 0), ("101", 1)], 2);
        let input = pat("010");
        let state = DenseQState::run(&training, &input, 1.0).unwrap();
        // Reachable kets: per member, the match register against the
        // input, either ancilla value.
        let mut populated = std::collections::HashSet::new();
        for (p, member) in training.members().iter().enumerate() {
            let d_bits = pattern_bits(&input.match_mask(&member.pattern).unwrap());
            for ancilla in [false, true] {
                populated.insert(state.layout.basis_index(
                    pattern_bits(&input),
                    d_bits,
                    member.label.index(),
                    ancilla,
                ));
            }
            let _ = p;
        }
        for (index, amp) in state.amplitudes().iter().enumerate() {
            if !populated.contains(&index) {
                assert_eq!(amp.re, 0.0, "basis {index} populated unexpectedly");
                assert_eq!(amp.im, 0.0, "basis {index} populated unexpectedly");
            }
        }
    }

    #[test]
    fn duplicate_members_rejected() {
        let training = set(&[("01", 0), ("01", 0)], 1);
        assert!(matches!(
            DenseQState::prepare(&training, &pat("00")),
            Err(Error::DuplicateTrainingKet { first: 0, second: 1 })
        ));
        // Same pattern in different classes is a distinct ket and fine.
        let training = set(&[("01", 0), ("01", 1)], 2);
        assert!(DenseQState::prepare(&training, &pat("00")).is_ok());
    }

    #[test]
    fn amplitude_for_range_check() {
        let state = DenseQState::run(&set(&[("0", 0)], 1), &pat("0"), 1.0).unwrap();
        assert!(matches!(
            state.amplitude_for(5, false),
            Err(Error::IndexOutOfRange { index: 5, .. })
        ));
    }
}
