//! Synthetic scaling benchmark of the classification procedure.
//!
//! One measured "run" executes the physical protocol cost model: every
//! shot re-prepares the superposition, runs the circuit end to end and
//! draws one (ancilla, class) measurement, so wall time is expected to
//! scale linearly in each of the training-set size, the feature count
//! and the shot count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpc::{BinaryPattern, ClassLabel, LabeledPattern, SparseQState, TrainingSet};

use crate::CliError;

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub train_sizes: Vec<usize>,
    pub feature_counts: Vec<usize>,
    pub shot_counts: Vec<u32>,
    /// Measurements per grid point; the fastest is reported.
    pub repeats: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            train_sizes: vec![1000, 2000],
            feature_counts: vec![256, 512],
            shot_counts: vec![64, 128],
            repeats: 3,
            epsilon: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TimingRow {
    pub n_train: usize,
    pub n_features: usize,
    pub shots: u32,
    /// Fastest wall-clock of the configured repeats.
    pub seconds: f64,
}

fn synthetic_instance(
    n_train: usize,
    n_features: usize,
    classes: usize,
    rng: &mut ChaCha8Rng,
) -> (TrainingSet, BinaryPattern) {
    let members = (0..n_train)
        .map(|_| LabeledPattern {
            pattern: BinaryPattern::from_fn(n_features, |_| rng.random()).unwrap(),
            label: ClassLabel(rng.random_range(0..classes) as u16),
        })
        .collect();
    let training = TrainingSet::new(members, classes).unwrap();
    let input = BinaryPattern::from_fn(n_features, |_| rng.random()).unwrap();
    (training, input)
}

/// Execute `shots` full protocol repetitions and count measurement
/// outcomes. Returns (successes, failures); the counts keep the work
/// observable so the optimizer cannot drop it.
fn run_shots(
    training: &TrainingSet,
    input: &BinaryPattern,
    epsilon: f64,
    shots: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(u64, u64), CliError> {
    let mut successes = 0u64;
    let mut failures = 0u64;
    for _ in 0..shots {
        let state = SparseQState::evolve(training, input.clone(), epsilon)
            .map_err(|e| CliError::Runtime(format!("sweep instance failed: {e}")))?;
        let p_zero = state.p_ancilla_zero();
        if rng.random::<f64>() < p_zero {
            successes += 1;
        } else {
            failures += 1;
        }
    }
    Ok((successes, failures))
}

/// Measure the full grid; rows appear in sweep order (training size,
/// then features, then shots).
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<TimingRow>, CliError> {
    if grid.train_sizes.is_empty() || grid.feature_counts.is_empty() || grid.shot_counts.is_empty()
    {
        return Err(CliError::Usage("timing sweep needs at least one value per axis".into()));
    }
    if grid.repeats == 0 {
        return Err(CliError::Usage("timing sweep needs at least one repeat".into()));
    }
    let mut rows = Vec::new();
    for &n_train in &grid.train_sizes {
        for &n_features in &grid.feature_counts {
            let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
            let (training, input) = synthetic_instance(n_train, n_features, 4, &mut rng);
            for &shots in &grid.shot_counts {
                let mut best = f64::INFINITY;
                for _ in 0..grid.repeats {
                    let started = Instant::now();
                    let counts = run_shots(&training, &input, grid.epsilon, shots, &mut rng)?;
                    let elapsed = started.elapsed().as_secs_f64();
                    std::hint::black_box(counts);
                    best = best.min(elapsed);
                }
                rows.push(TimingRow { n_train, n_features, shots, seconds: best });
            }
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[TimingRow]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Runtime(format!("cannot write csv: {e}"));
    writer
        .write_record(["n_train", "n_features", "shots", "seconds"])
        .map_err(io_err)?;
    for row in rows {
        writer
            .write_record([
                row.n_train.to_string(),
                row.n_features.to_string(),
                row.shots.to_string(),
                row.seconds.to_string(),
            ])
            .map_err(io_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Runtime(format!("cannot write csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(format!("csv not utf-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_sweep_yields_one_row() {
        let grid = SweepGrid {
            train_sizes: vec![16],
            feature_counts: vec![8],
            shot_counts: vec![2],
            repeats: 1,
            epsilon: 1.0,
            seed: 1,
        };
        let rows = run_sweep(&grid).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].seconds > 0.0);
    }

    #[test]
    fn row_count_matches_grid_size() {
        let grid = SweepGrid {
            train_sizes: vec![8, 16],
            feature_counts: vec![4, 8, 16],
            shot_counts: vec![1, 2],
            repeats: 1,
            epsilon: 1.0,
            seed: 1,
        };
        let rows = run_sweep(&grid).unwrap();
        assert_eq!(rows.len(), 12);
    }

    #[test]
    fn empty_axis_is_rejected() {
        let grid = SweepGrid { train_sizes: vec![], ..SweepGrid::default() };
        assert!(run_sweep(&grid).is_err());
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let rows = vec![TimingRow { n_train: 1, n_features: 2, shots: 3, seconds: 0.5 }];
        let csv = rows_to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("n_train,n_features,shots,seconds"));
    }
}
