//! Experiment execution: evaluate every configured classifier on every
//! test example, in parallel, with per-example seeds derived from the
//! base seed so the schedule cannot change results.

use std::time::Instant;

use rayon::prelude::*;

use qpc::mnist::IdxDataset;
use qpc::{
    analytic_distribution, centroid_classify, classify, knn_classify, simulate_distribution,
    weighted_knn_classify, BaselineConfig, BinaryPattern, ClassLabel, Error as QpcError,
    TrainingSet, Weighting,
};

use crate::experiment::{example_seed, ClassifierSpec, ExperimentSpec};
use crate::report::{ClassifierReport, EvaluationReport, ExampleRecord, REPORT_SCHEMA};
use crate::CliError;

fn load_subsets(
    spec: &ExperimentSpec,
) -> Result<(TrainingSet, Vec<(BinaryPattern, ClassLabel)>), CliError> {
    let train = IdxDataset::from_files(&spec.train_images, &spec.train_labels)
        .map_err(|e| CliError::from_data_source(e, "training data"))?;
    let test = IdxDataset::from_files(&spec.test_images, &spec.test_labels)
        .map_err(|e| CliError::from_data_source(e, "test data"))?;
    qpc::mnist::make_subsets(
        &train,
        &test,
        spec.n_train,
        spec.n_test,
        spec.subset.selection(),
        spec.threshold,
    )
    .map_err(|e| CliError::Usage(format!("cannot carve subsets: {e}")))
}

fn classify_example(
    classifier: &ClassifierSpec,
    training: &TrainingSet,
    index: usize,
    input: &BinaryPattern,
    true_label: ClassLabel,
    base_seed: u64,
) -> Result<ExampleRecord, CliError> {
    let mut record = ExampleRecord {
        index,
        true_label: true_label.0,
        predicted: None,
        correct: false,
        abstained: false,
        p_ancilla_zero: None,
        margin: None,
        distribution: None,
        shots_used: None,
        postselection_failures: None,
    };

    match classifier {
        ClassifierSpec::Qpc { .. } => {
            let config = classifier
                .qpc_config(example_seed(base_seed, index))
                .expect("qpc spec yields a config");
            match classify(training, input, &config) {
                Ok(result) => {
                    record.predicted = Some(result.predicted.0);
                    record.correct = result.predicted == true_label;
                    record.p_ancilla_zero = Some(result.p_ancilla_zero);
                    record.margin = Some(result.margin);
                    record.distribution = Some(result.distribution.probabilities().to_vec());
                    record.shots_used = Some(result.shots_used);
                    record.postselection_failures = Some(result.postselection_failures);
                }
                Err(QpcError::PostselectionImpossible { probability }) => {
                    record.abstained = true;
                    record.p_ancilla_zero = Some(probability);
                }
                Err(QpcError::PostselectionExhausted { shots }) => {
                    record.abstained = true;
                    record.shots_used = Some(shots);
                    record.postselection_failures = Some(shots);
                }
                Err(other) => {
                    return Err(CliError::Runtime(format!("example {index}: {other}")))
                }
            }
        }
        ClassifierSpec::Knn { k } => {
            let config = BaselineConfig { k: *k, weighting: Weighting::Uniform };
            let predicted = knn_classify(training, input, &config)
                .map_err(|e| CliError::Usage(format!("knn: {e}")))?;
            record.predicted = Some(predicted.0);
            record.correct = predicted == true_label;
        }
        ClassifierSpec::WeightedKnn { k, weighting } => {
            let config = BaselineConfig { k: *k, weighting: *weighting };
            let predicted = weighted_knn_classify(training, input, &config)
                .map_err(|e| CliError::Usage(format!("weighted-knn: {e}")))?;
            record.predicted = Some(predicted.0);
            record.correct = predicted == true_label;
        }
        ClassifierSpec::Centroid => {
            let predicted = centroid_classify(training, input)
                .map_err(|e| CliError::Runtime(format!("centroid: {e}")))?;
            record.predicted = Some(predicted.0);
            record.correct = predicted == true_label;
        }
    }
    Ok(record)
}

/// Run every configured classifier over the test subset and assemble
/// the report. Deterministic given the spec; `emit_timings` adds
/// wall-clock seconds at the cost of byte-reproducibility.
pub fn run_experiment(spec: &ExperimentSpec, emit_timings: bool) -> Result<EvaluationReport, CliError> {
    spec.validate()?;
    let (training, test_pairs) = load_subsets(spec)?;

    let mut classifiers = Vec::with_capacity(spec.classifiers.len());
    for classifier in &spec.classifiers {
        let started = Instant::now();
        let examples: Vec<ExampleRecord> = test_pairs
            .par_iter()
            .enumerate()
            .map(|(index, (input, true_label))| {
                classify_example(classifier, &training, index, input, *true_label, spec.base_seed)
            })
            .collect::<Result<_, _>>()?;
        let wall_seconds = started.elapsed().as_secs_f64();

        let correct = examples.iter().filter(|r| r.correct).count();
        let abstentions = examples.iter().filter(|r| r.abstained).count();
        let with_p0: Vec<f64> = examples.iter().filter_map(|r| r.p_ancilla_zero).collect();
        let mean_p_ancilla_zero = if with_p0.is_empty() {
            None
        } else {
            Some(with_p0.iter().sum::<f64>() / with_p0.len() as f64)
        };
        classifiers.push(ClassifierReport {
            id: classifier.id(),
            accuracy: correct as f64 / examples.len() as f64,
            correct,
            total: examples.len(),
            abstentions,
            mean_p_ancilla_zero,
            wall_seconds: emit_timings.then_some(wall_seconds),
            examples,
        });
    }

    Ok(EvaluationReport {
        schema: REPORT_SCHEMA.into(),
        spec: spec.clone(),
        classifiers,
    })
}

/// Per-class probability table for a single test example: the analytic
/// distribution next to a sampled empirical one.
#[derive(Clone, Debug)]
pub struct DistributionTable {
    pub example_index: usize,
    pub true_label: u16,
    pub p_ancilla_zero: f64,
    pub margin: f64,
    pub shots: u32,
    pub postselection_failures: u32,
    /// (class, analytic probability, empirical probability).
    pub rows: Vec<(u16, f64, f64)>,
}

impl DistributionTable {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "example {} (true label {}): P(0_a) = {:.6}, top-2 margin = {:.6}\n",
            self.example_index, self.true_label, self.p_ancilla_zero, self.margin
        ));
        out.push_str(&format!(
            "sampled at {} shots ({} postselection failures)\n",
            self.shots, self.postselection_failures
        ));
        out.push_str("class  analytic    empirical\n");
        for (class, analytic, empirical) in &self.rows {
            out.push_str(&format!("{class:>5}  {analytic:<10.6}  {empirical:<10.6}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| CliError::Runtime(format!("cannot write csv: {e}"));
        writer
            .write_record(["schema", "example", "class", "analytic", "empirical", "p_ancilla_zero", "margin"])
            .map_err(io_err)?;
        for (class, analytic, empirical) in &self.rows {
            writer
                .write_record([
                    REPORT_SCHEMA.to_string(),
                    self.example_index.to_string(),
                    class.to_string(),
                    analytic.to_string(),
                    empirical.to_string(),
                    self.p_ancilla_zero.to_string(),
                    self.margin.to_string(),
                ])
                .map_err(io_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Runtime(format!("cannot write csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Runtime(format!("csv not utf-8: {e}")))
    }
}

/// Build the distribution table for one test example using the first
/// quantum classifier in the spec (or the analytic default).
pub fn distribution_table(
    spec: &ExperimentSpec,
    example_index: usize,
) -> Result<DistributionTable, CliError> {
    let (training, test_pairs) = load_subsets(spec)?;
    let (input, true_label) = test_pairs.get(example_index).ok_or_else(|| {
        CliError::Usage(format!(
            "example index {example_index} out of range ({} test examples)",
            test_pairs.len()
        ))
    })?;

    let classifier = spec
        .classifiers
        .iter()
        .find(|c| matches!(c, ClassifierSpec::Qpc { .. }))
        .cloned()
        .unwrap_or_else(ClassifierSpec::default_qpc);
    let seed = example_seed(spec.base_seed, example_index);
    let mut config = classifier.qpc_config(seed).expect("qpc spec yields a config");
    if config.shots == 0 {
        config.shots = qpc::QpcConfig::default().shots;
    }
    config.retrieval = qpc::RetrievalVersion::ClassMeasurement;

    let analytic = analytic_distribution(&training, input, config.epsilon)
        .map_err(|e| CliError::Runtime(format!("example {example_index}: {e}")))?;
    let sampled = simulate_distribution(&training, input, &config)
        .map_err(|e| CliError::Runtime(format!("example {example_index}: {e}")))?;

    let rows = analytic
        .probabilities()
        .iter()
        .zip(sampled.distribution.probabilities())
        .enumerate()
        .map(|(class, (a, s))| (class as u16, *a, *s))
        .collect();
    Ok(DistributionTable {
        example_index,
        true_label: true_label.0,
        p_ancilla_zero: analytic.p_ancilla_zero(),
        margin: analytic.margin(),
        shots: sampled.shots_used,
        postselection_failures: sampled.postselection_failures,
        rows,
    })
}
