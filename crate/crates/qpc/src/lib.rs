//! Quantum pattern classification by Hamming distance, simulated
//! exactly.
//!
//! The classifier stores a labeled set of binary patterns in a uniform
//! superposition, writes each pattern's Hamming distance to the input
//! into its phase through a diagonal unitary, and interferes the phases
//! into measurable amplitudes with an ancilla Hadamard. Conditioned on a
//! successful ancilla postselection, the class register is distributed
//! as
//!
//! ```text
//! P(c) = sum_{l in c} cos^2(gamma d_H(x, v_l)) / (N P(0_a)),
//! gamma = epsilon * pi / (2n)
//! ```
//!
//! so nearby training patterns pull probability toward their class.
//!
//! The crate provides:
//!
//! - [`sparse`]: exact gate-by-gate execution on a term list that never
//!   exceeds 2N entries, usable at full MNIST scale (n = 784);
//! - [`dense`]: a brute-force full state-vector oracle for desk-scale
//!   cross-validation of every gate and sign convention;
//! - [`classify`]: closed-form class distributions, seeded measurement
//!   sampling, and the neighbour-sampling retrieval variant;
//! - [`baselines`]: classical kNN, distance-weighted kNN and nearest
//!   class centroid under the same metric;
//! - [`mnist`]: strict IDX parsing (plain or gzipped), binarization and
//!   subset carving.

pub mod baselines;
pub mod classify;
pub mod dense;
pub mod error;
pub mod mnist;
pub mod pattern;
pub mod sparse;

pub use baselines::{centroid_classify, knn_classify, weighted_knn_classify, BaselineConfig, Weighting};
pub use classify::{
    analytic_distribution, classify, sample_neighbours, simulate_distribution, ClassDistribution,
    ClassificationResult, QpcConfig, RetrievalVersion,
};
pub use dense::DenseQState;
pub use error::{Error, Result};
pub use pattern::{BinaryPattern, ClassLabel, LabeledPattern, TrainingSet};
pub use sparse::{SparseQState, SparseTerm, Stage};
