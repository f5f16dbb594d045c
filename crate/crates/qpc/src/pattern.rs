//! Binary feature patterns, Hamming metrics and labeled training sets.
//!
//! Patterns are stored as packed 64-bit words so that Hamming distances
//! reduce to XOR + popcount; at MNIST scale (784 features) a full
//! evaluation computes hundreds of thousands of distances.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Fixed-length string of binary features.
///
/// Invariant: unused high bits of the last word are always zero, so
/// word-wise popcounts never see garbage.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPattern {
    words: Vec<u64>,
    len: usize,
}

impl BinaryPattern {
    /// All-zero pattern of `len` features.
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyPattern);
        }
        Ok(Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        })
    }

    /// Build from bytes that must each be exactly 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut pattern = Self::zeros(bits.len())?;
        for (k, &bit) in bits.iter().enumerate() {
            match bit {
                0 => {}
                1 => pattern.set(k),
                other => {
                    return Err(Error::InvalidParameter {
                        name: "bit",
                        reason: format!("feature {k} is {other}, expected 0 or 1"),
                    })
                }
            }
        }
        Ok(pattern)
    }

    /// Build from a predicate over feature positions.
    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        let mut pattern = Self::zeros(len)?;
        for k in 0..len {
            if f(k) {
                pattern.set(k);
            }
        }
        Ok(pattern)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // len >= 1 by construction
    }

    pub fn get(&self, k: usize) -> bool {
        debug_assert!(k < self.len);
        self.words[k / WORD_BITS] >> (k % WORD_BITS) & 1 == 1
    }

    fn set(&mut self, k: usize) {
        self.words[k / WORD_BITS] |= 1 << (k % WORD_BITS);
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |k| self.get(k))
    }

    /// Number of 1 bits.
    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Number of positions at which the two patterns differ.
    pub fn hamming_distance(&self, other: &Self) -> Result<u32> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum())
    }

    /// Number of positions at which the two patterns agree,
    /// `len - hamming_distance`.
    pub fn match_count(&self, other: &Self) -> Result<u32> {
        Ok(self.len as u32 - self.hamming_distance(other)?)
    }

    /// Per-position match register: bit k is 1 iff the patterns agree at k.
    /// This is NOT(self XOR other) with the tail re-masked.
    pub fn match_mask(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| !(a ^ b))
            .collect();
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(Self {
            words,
            len: self.len,
        })
    }

    /// In-place variant of [`Self::match_mask`]: `self` becomes the
    /// match register of `self` against `other`.
    pub(crate) fn apply_match_mask(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (word, mask) in self.words.iter_mut().zip(&other.words) {
            *word = !(*word ^ mask);
        }
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            *self.words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(())
    }

    /// Raw packed words (tail bits zero); stable tie-break key.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryPattern({self})")
    }
}

impl fmt::Display for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter_bits() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter {
                    name: "pattern",
                    reason: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        Self::from_bits(&bits)
    }
}

/// Zero-based class label; ranges over `0..class_count` of the enclosing
/// training set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ClassLabel(pub u16);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A training example: pattern plus its class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LabeledPattern {
    pub pattern: BinaryPattern,
    pub label: ClassLabel,
}

/// Immutable labeled training set over a fixed feature count and class
/// count. Duplicate members are permitted; each keeps its own identity.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    members: Vec<LabeledPattern>,
    feature_count: usize,
    class_count: usize,
}

impl TrainingSet {
    pub fn new(members: Vec<LabeledPattern>, class_count: usize) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyTrainingSet)?;
        let feature_count = first.pattern.len();
        if class_count == 0 {
            return Err(Error::InvalidParameter {
                name: "class_count",
                reason: "must be at least 1".into(),
            });
        }
        for member in &members {
            if member.pattern.len() != feature_count {
                return Err(Error::DimensionMismatch {
                    expected: feature_count,
                    actual: member.pattern.len(),
                });
            }
            if member.label.index() >= class_count {
                return Err(Error::LabelOutOfRange {
                    label: member.label.index(),
                    class_count,
                });
            }
        }
        Ok(Self {
            members,
            feature_count,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // N >= 1 by construction
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn members(&self) -> &[LabeledPattern] {
        &self.members
    }

    pub fn get(&self, index: usize) -> Result<&LabeledPattern> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.members.len(),
        })
    }

    /// Check an input pattern against this set's feature count.
    pub fn check_input(&self, input: &BinaryPattern) -> Result<()> {
        if input.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                actual: input.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> BinaryPattern {
        s.parse().unwrap()
    }

    #[test]
    fn hamming_identity_complement_partial() {
        assert_eq!(pat("0101").hamming_distance(&pat("0101")).unwrap(), 0);
        assert_eq!(pat("0101").hamming_distance(&pat("1010")).unwrap(), 4);
        assert_eq!(pat("0101").hamming_distance(&pat("0110")).unwrap(), 2);
    }

    #[test]
    fn match_count_mirrors_distance() {
        assert_eq!(pat("0101").match_count(&pat("0101")).unwrap(), 4);
        assert_eq!(pat("0101").match_count(&pat("1010")).unwrap(), 0);
        assert_eq!(pat("0101").match_count(&pat("0110")).unwrap(), 2);
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = pat("0101").hamming_distance(&pat("010")).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, actual: 3 }));
        assert!(pat("0101").match_count(&pat("01")).is_err());
        assert!(pat("0101").match_mask(&pat("01")).is_err());
    }

    #[test]
    fn match_mask_examples() {
        assert_eq!(pat("0101").match_mask(&pat("0101")).unwrap(), pat("1111"));
        assert_eq!(pat("0101").match_mask(&pat("1010")).unwrap(), pat("0000"));
        assert_eq!(pat("0101").match_mask(&pat("0110")).unwrap(), pat("1100"));
    }

    #[test]
    fn match_mask_tail_bits_stay_zero() {
        let a = BinaryPattern::zeros(70).unwrap();
        let b = BinaryPattern::zeros(70).unwrap();
        let mask = a.match_mask(&b).unwrap();
        assert_eq!(mask.count_ones(), 70);
        assert_eq!(mask.words()[1] >> 6, 0);
    }

    #[test]
    fn distance_symmetric_and_sum_rule_exhaustive() {
        // Exhaustive over n = 1..=6.
        for n in 1..=6usize {
            for a in 0u64..1 << n {
                for b in 0u64..1 << n {
                    let pa = BinaryPattern::from_fn(n, |k| a >> k & 1 == 1).unwrap();
                    let pb = BinaryPattern::from_fn(n, |k| b >> k & 1 == 1).unwrap();
                    let d = pa.hamming_distance(&pb).unwrap();
                    assert_eq!(d, pb.hamming_distance(&pa).unwrap());
                    assert_eq!(d + pa.match_count(&pb).unwrap(), n as u32);
                }
            }
        }
    }

    #[test]
    fn triangle_inequality_exhaustive_n_le_6() {
        for n in 1..=6usize {
            let patterns: Vec<BinaryPattern> = (0u64..1 << n)
                .map(|v| BinaryPattern::from_fn(n, |k| v >> k & 1 == 1).unwrap())
                .collect();
            for a in &patterns {
                for b in &patterns {
                    let dab = a.hamming_distance(b).unwrap();
                    for c in &patterns {
                        let dac = a.hamming_distance(c).unwrap();
                        let dbc = b.hamming_distance(c).unwrap();
                        assert!(dac <= dab + dbc);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_pattern_rejected() {
        assert!(matches!(BinaryPattern::zeros(0), Err(Error::EmptyPattern)));
        assert!(BinaryPattern::from_bits(&[]).is_err());
    }

    #[test]
    fn from_bits_rejects_non_binary() {
        assert!(BinaryPattern::from_bits(&[0, 1, 2]).is_err());
    }

    #[test]
    fn display_round_trip() {
        let p = pat("0110010");
        assert_eq!(p.to_string(), "0110010");
    }

    #[test]
    fn training_set_validation() {
        assert!(matches!(
            TrainingSet::new(vec![], 2),
            Err(Error::EmptyTrainingSet)
        ));

        let member = LabeledPattern {
            pattern: pat("01"),
            label: ClassLabel(3),
        };
        assert!(matches!(
            TrainingSet::new(vec![member], 2),
            Err(Error::LabelOutOfRange { label: 3, class_count: 2 })
        ));

        let mixed = vec![
            LabeledPattern { pattern: pat("01"), label: ClassLabel(0) },
            LabeledPattern { pattern: pat("011"), label: ClassLabel(0) },
        ];
        assert!(matches!(
            TrainingSet::new(mixed, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn duplicates_are_permitted() {
        let member = LabeledPattern {
            pattern: pat("01"),
            label: ClassLabel(0),
        };
        let set = TrainingSet::new(vec![member.clone(), member], 1).unwrap();
        assert_eq!(set.len(), 2);
    }
}
