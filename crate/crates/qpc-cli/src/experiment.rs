//! Declarative experiment specification: dataset paths, subset carving,
//! and the classifier roster. A spec can come from a JSON file, from
//! command-line flags, or from a file with flag overrides; the resolved
//! spec is embedded verbatim in every report so a run can be reproduced
//! from its output alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use qpc::mnist::SubsetSelection;
use qpc::{QpcConfig, RetrievalVersion, Weighting};

use crate::CliError;

/// How the train/test subsets are drawn; `first` or `seed:<u64>`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubsetSpec {
    First,
    Seed(u64),
}

impl SubsetSpec {
    pub fn selection(self) -> SubsetSelection {
        match self {
            SubsetSpec::First => SubsetSelection::FirstN,
            SubsetSpec::Seed(seed) => SubsetSelection::Seeded(seed),
        }
    }
}

impl fmt::Display for SubsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetSpec::First => f.write_str("first"),
            SubsetSpec::Seed(seed) => write!(f, "seed:{seed}"),
        }
    }
}

impl FromStr for SubsetSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "first" {
            return Ok(SubsetSpec::First);
        }
        if let Some(seed) = s.strip_prefix("seed:") {
            let seed = seed
                .parse()
                .map_err(|_| CliError::Usage(format!("bad subset seed {seed:?}")))?;
            return Ok(SubsetSpec::Seed(seed));
        }
        Err(CliError::Usage(format!(
            "bad subset spec {s:?}: expected `first` or `seed:<u64>`"
        )))
    }
}

impl Serialize for SubsetSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SubsetSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Quantum classifier retrieval mode.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QpcMode {
    /// Closed-form distribution, no sampling.
    Analytic,
    /// Sampled class-register measurements.
    Class,
    /// Sampled neighbour draws from the postselected pattern register.
    Neighbour,
}

/// One classifier to run, parsed from a compact spec string:
///
/// ```text
/// qpc[:mode=analytic|class|neighbour][,epsilon=<f>][,shots=<n>][,k=<n>]
/// knn:k=<n>
/// weighted-knn:k=<n>[,weight=uniform|inverse|cosine]
/// centroid
/// ```
#[derive(Clone, PartialEq, Debug)]
pub enum ClassifierSpec {
    Qpc {
        mode: QpcMode,
        epsilon: f64,
        shots: u32,
        neighbour_samples: u32,
    },
    Knn {
        k: usize,
    },
    WeightedKnn {
        k: usize,
        weighting: Weighting,
    },
    Centroid,
}

impl ClassifierSpec {
    pub fn default_qpc() -> Self {
        ClassifierSpec::Qpc {
            mode: QpcMode::Analytic,
            epsilon: 1.0,
            shots: QpcConfig::default().shots,
            neighbour_samples: QpcConfig::default().neighbour_samples,
        }
    }

    /// Canonical id string; parsing it back yields an equal spec.
    pub fn id(&self) -> String {
        match self {
            ClassifierSpec::Qpc { mode, epsilon, shots, neighbour_samples } => match mode {
                QpcMode::Analytic => format!("qpc:mode=analytic,epsilon={epsilon}"),
                QpcMode::Class => {
                    format!("qpc:mode=class,epsilon={epsilon},shots={shots}")
                }
                QpcMode::Neighbour => {
                    format!("qpc:mode=neighbour,epsilon={epsilon},k={neighbour_samples}")
                }
            },
            ClassifierSpec::Knn { k } => format!("knn:k={k}"),
            ClassifierSpec::WeightedKnn { k, weighting } => {
                let weight = match weighting {
                    Weighting::Uniform => "uniform",
                    Weighting::InverseDistance => "inverse",
                    Weighting::CosineSquared => "cosine",
                };
                format!("weighted-knn:k={k},weight={weight}")
            }
            ClassifierSpec::Centroid => "centroid".into(),
        }
    }

    /// Materialize a [`QpcConfig`] for one test example.
    pub fn qpc_config(&self, rng_seed: u64) -> Option<QpcConfig> {
        match *self {
            ClassifierSpec::Qpc { mode, epsilon, shots, neighbour_samples } => Some(QpcConfig {
                epsilon,
                shots: if mode == QpcMode::Analytic { 0 } else { shots },
                retrieval: if mode == QpcMode::Neighbour {
                    RetrievalVersion::NeighbourSampling
                } else {
                    RetrievalVersion::ClassMeasurement
                },
                neighbour_samples,
                rng_seed,
            }),
            _ => None,
        }
    }
}

fn parse_keys(body: &str, spec: &str) -> Result<Vec<(String, String)>, CliError> {
    body.split(',')
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    CliError::Usage(format!("bad classifier spec {spec:?}: expected key=value, got {part:?}"))
                })
        })
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str, spec: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad classifier spec {spec:?}: cannot parse {key}={value}")))
}

impl FromStr for ClassifierSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let (name, body) = spec.split_once(':').unwrap_or((spec, ""));
        let keys = parse_keys(body, spec)?;
        let unknown_key = |key: &str| {
            CliError::Usage(format!("bad classifier spec {spec:?}: unknown key {key:?}"))
        };
        match name {
            "qpc" => {
                let mut mode = QpcMode::Analytic;
                let mut epsilon = 1.0f64;
                let mut shots = QpcConfig::default().shots;
                let mut neighbour_samples = QpcConfig::default().neighbour_samples;
                for (key, value) in keys {
                    match key.as_str() {
                        "mode" => {
                            mode = match value.as_str() {
                                "analytic" => QpcMode::Analytic,
                                "class" => QpcMode::Class,
                                "neighbour" | "neighbor" => QpcMode::Neighbour,
                                other => {
                                    return Err(CliError::Usage(format!(
                                        "bad classifier spec {spec:?}: unknown mode {other:?}"
                                    )))
                                }
                            }
                        }
                        "epsilon" => epsilon = parse_value("epsilon", &value, spec)?,
                        "shots" => shots = parse_value("shots", &value, spec)?,
                        "k" => neighbour_samples = parse_value("k", &value, spec)?,
                        other => return Err(unknown_key(other)),
                    }
                }
                if !(epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "bad classifier spec {spec:?}: epsilon must be positive"
                    )));
                }
                Ok(ClassifierSpec::Qpc { mode, epsilon, shots, neighbour_samples })
            }
            "knn" => {
                let mut k = None;
                for (key, value) in keys {
                    match key.as_str() {
                        "k" => k = Some(parse_value("k", &value, spec)?),
                        other => return Err(unknown_key(other)),
                    }
                }
                let k = k.ok_or_else(|| {
                    CliError::Usage(format!("bad classifier spec {spec:?}: knn requires k=<n>"))
                })?;
                Ok(ClassifierSpec::Knn { k })
            }
            "weighted-knn" => {
                let mut k = None;
                let mut weighting = Weighting::InverseDistance;
                for (key, value) in keys {
                    match key.as_str() {
                        "k" => k = Some(parse_value("k", &value, spec)?),
                        "weight" => {
                            weighting = match value.as_str() {
                                "uniform" => Weighting::Uniform,
                                "inverse" => Weighting::InverseDistance,
                                "cosine" => Weighting::CosineSquared,
                                other => {
                                    return Err(CliError::Usage(format!(
                                        "bad classifier spec {spec:?}: unknown weight {other:?}"
                                    )))
                                }
                            }
                        }
                        other => return Err(unknown_key(other)),
                    }
                }
                let k = k.ok_or_else(|| {
                    CliError::Usage(format!(
                        "bad classifier spec {spec:?}: weighted-knn requires k=<n>"
                    ))
                })?;
                Ok(ClassifierSpec::WeightedKnn { k, weighting })
            }
            "centroid" => {
                if let Some((key, _)) = keys.first() {
                    return Err(unknown_key(key));
                }
                Ok(ClassifierSpec::Centroid)
            }
            other => Err(CliError::Usage(format!(
                "unknown classifier {other:?}: expected qpc, knn, weighted-knn or centroid"
            ))),
        }
    }
}

impl Serialize for ClassifierSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for ClassifierSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_n_train() -> usize {
    400
}

fn default_n_test() -> usize {
    100
}

fn default_subset() -> SubsetSpec {
    SubsetSpec::First
}

fn default_threshold() -> u8 {
    128
}

/// A complete, reproducible experiment description.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub train_images: String,
    pub train_labels: String,
    pub test_images: String,
    pub test_labels: String,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_subset")]
    pub subset: SubsetSpec,
    #[serde(default = "default_threshold")]
    pub threshold: u8,
    pub classifiers: Vec<ClassifierSpec>,
    /// Per-example RNG seeds are derived from this and the example
    /// index, so parallel evaluation cannot change results.
    #[serde(default)]
    pub base_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.classifiers.is_empty() {
            return Err(CliError::Usage("at least one classifier must be configured".into()));
        }
        Ok(())
    }
}

/// Stable per-example seed derivation (splitmix64 over base and index).
pub fn example_seed(base_seed: u64, example_index: usize) -> u64 {
    let mut z = base_seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(example_index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
