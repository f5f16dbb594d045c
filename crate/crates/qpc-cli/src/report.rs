//! Machine-readable evaluation reports. JSON carries the full report;
//! CSV carries the flat per-example table. Both embed the schema tag
//! and the resolved experiment spec (JSON) or classifier id (CSV) so
//! results stay attributable.
//!
//! Reports are byte-deterministic for a given spec and seeds: field
//! order is fixed, and wall-clock timings are only included on request.

use serde::{Deserialize, Serialize};

use crate::experiment::ExperimentSpec;
use crate::CliError;

pub const REPORT_SCHEMA: &str = "qpc-report/1";

/// Everything recorded about one test example under one classifier.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub index: usize,
    pub true_label: u16,
    /// Missing when the classifier abstained.
    pub predicted: Option<u16>,
    pub correct: bool,
    /// Postselection was impossible for this example.
    pub abstained: bool,
    /// Quantum classifiers only.
    pub p_ancilla_zero: Option<f64>,
    pub margin: Option<f64>,
    pub distribution: Option<Vec<f64>>,
    pub shots_used: Option<u32>,
    pub postselection_failures: Option<u32>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub id: String,
    /// correct / total, abstentions counted as incorrect.
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub abstentions: usize,
    /// Mean ancilla-zero probability over examples that report one.
    pub mean_p_ancilla_zero: Option<f64>,
    /// Wall-clock seconds; omitted by default so reports stay
    /// byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
    pub examples: Vec<ExampleRecord>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema: String,
    pub spec: ExperimentSpec,
    pub classifiers: Vec<ClassifierReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("cannot serialize report: {e}")))?;
        json.push('\n');
        Ok(json)
    }

    pub fn from_json(json: &str) -> Result<Self, CliError> {
        serde_json::from_str(json).map_err(|e| CliError::Data(format!("cannot parse report: {e}")))
    }

    /// Flat per-example CSV table.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| CliError::Runtime(format!("cannot write csv: {e}"));
        writer
            .write_record([
                "schema",
                "classifier",
                "example",
                "true_label",
                "predicted",
                "correct",
                "abstained",
                "p_ancilla_zero",
                "margin",
                "shots_used",
                "postselection_failures",
            ])
            .map_err(io_err)?;
        for classifier in &self.classifiers {
            for record in &classifier.examples {
                let optional = |value: Option<String>| value.unwrap_or_default();
                writer
                    .write_record([
                        REPORT_SCHEMA.to_string(),
                        classifier.id.clone(),
                        record.index.to_string(),
                        record.true_label.to_string(),
                        optional(record.predicted.map(|p| p.to_string())),
                        record.correct.to_string(),
                        record.abstained.to_string(),
                        optional(record.p_ancilla_zero.map(|p| p.to_string())),
                        optional(record.margin.map(|m| m.to_string())),
                        optional(record.shots_used.map(|s| s.to_string())),
                        optional(record.postselection_failures.map(|f| f.to_string())),
                    ])
                    .map_err(io_err)?;
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Runtime(format!("cannot write csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Runtime(format!("csv not utf-8: {e}")))
    }

    /// One-line summary per classifier for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.classifiers
            .iter()
            .map(|c| {
                let mean_p0 = c
                    .mean_p_ancilla_zero
                    .map(|p| format!(", mean P(0_a) {p:.4}"))
                    .unwrap_or_default();
                let abstained = if c.abstentions > 0 {
                    format!(", {} abstained", c.abstentions)
                } else {
                    String::new()
                };
                format!(
                    "{}: accuracy {:.4} ({}/{}){}{}",
                    c.id, c.accuracy, c.correct, c.total, mean_p0, abstained
                )
            })
            .collect()
    }
}
