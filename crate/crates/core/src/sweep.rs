//! The budget experiment: for a fixed total of perfect-information
//! evaluations, train one regressor per samples-per-example choice k and
//! compare best validation errors with budgets equated by evaluations or
//! by training updates.
//!
//! The two comparison axes come from one training run per (k, seed).
//! The evaluation-equated best is the minimum validation error over the
//! cadence checkpoints within the first pass over the dataset, where
//! each example (and thus each of the N budgeted evaluations) has been
//! consumed at most once; this is what a learner sampling its data
//! online would have achieved with the same budget. The update-equated
//! best is the minimum within the configured update budget, with
//! dataset reuse across epochs permitted.
//!
//! Each (k, seed) run owns a derived seed, datasets are regenerated per
//! run, and runs never share state, so the sweep is deterministic under
//! any parallel schedule. Failed runs are recorded and reported; the
//! remaining runs still complete and persist.

use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::infoset::{generate_dataset, BudgetPlan, InformationSetProvider};
use crate::regressor::{
    train, trajectory_csv, Encoding, Mlp, TrainConfig, TrajectoryPoint, ValidationSet,
};
use crate::rng::{derive_seed, tag};
use crate::{Error, Result};

/// Configuration of one sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Samples per training example, one trained model per value.
    pub ks: Vec<u64>,
    /// Total evaluation budget N given to every k.
    pub budget: u64,
    /// Update cap used for the update-equated comparison axis.
    pub update_budget: u64,
    pub seeds: Vec<u64>,
    /// Hidden layer widths of the regressor.
    pub hidden_layers: Vec<usize>,
    /// Template for per-run training; the per-run seed is derived.
    pub train: TrainConfig,
}

/// The k values used by the reference experiment.
pub const DEFAULT_KS: [u64; 9] = [1, 2, 3, 5, 10, 25, 50, 100, 1000];

impl SweepConfig {
    pub fn new(budget: u64, ks: Vec<u64>, seeds: Vec<u64>) -> SweepConfig {
        let train = TrainConfig::default();
        SweepConfig {
            ks,
            budget,
            update_budget: train.max_updates,
            seeds,
            hidden_layers: vec![64, 64],
            train,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.iter().any(|&k| k < 1) {
            return Err(Error::InvalidInput(
                "sweep needs a nonempty list of ks, each at least 1".to_string(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one seed".to_string()));
        }
        if self.train.max_updates < self.update_budget {
            return Err(Error::InvalidInput(format!(
                "training caps updates at {} but the update-equated axis needs {}",
                self.train.max_updates, self.update_budget
            )));
        }
        Ok(())
    }
}

/// One completed (k, seed) training run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub k: u64,
    pub seed: u64,
    /// Dataset size n.
    pub n: u64,
    pub evaluations_consumed: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub best_mae_evalaxis: f64,
    pub best_mse_evalaxis: f64,
    pub best_mae_updateaxis: f64,
    pub best_mse_updateaxis: f64,
    pub updates_to_best: u64,
    pub wallclock_s: f64,
}

#[derive(Debug, Clone)]
pub struct FailureRecord {
    pub k: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub budget: u64,
    pub update_budget: u64,
    pub seeds: Vec<u64>,
    pub ks: Vec<u64>,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<FailureRecord>,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Median across seeds of the per-run best MAE for one k.
    pub fn median_best_mae(&self, k: u64, update_axis: bool) -> Option<f64> {
        let values: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.k == k)
            .map(|r| {
                if update_axis {
                    r.best_mae_updateaxis
                } else {
                    r.best_mae_evalaxis
                }
            })
            .collect();
        median(&values)
    }
}

/// Train one regressor per (k, seed) with fresh initialization and a
/// fresh dataset, recording both comparison axes.
pub fn run_sweep(
    provider: &dyn InformationSetProvider,
    validation: &ValidationSet,
    config: &SweepConfig,
) -> Result<SweepResult> {
    config.validate()?;
    let encoding = Encoding::OneHot {
        dim: provider.observable_count(),
    };
    let mut sizes = vec![encoding.dim()];
    sizes.extend_from_slice(&config.hidden_layers);
    sizes.push(1);

    let cells: Vec<(u64, u64)> = config
        .ks
        .iter()
        .flat_map(|&k| config.seeds.iter().map(move |&s| (k, s)))
        .collect();

    let outcomes: Vec<std::result::Result<RunRecord, FailureRecord>> = cells
        .par_iter()
        .map(|&(k, seed)| {
            run_one(provider, validation, config, &encoding, &sizes, k, seed)
                .map_err(|e| FailureRecord {
                    k,
                    seed,
                    message: e.to_string(),
                })
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(run) => runs.push(run),
            Err(failure) => failures.push(failure),
        }
    }
    runs.sort_by_key(|r| (r.k, r.seed));
    failures.sort_by_key(|f| (f.k, f.seed));

    Ok(SweepResult {
        budget: config.budget,
        update_budget: config.update_budget,
        seeds: config.seeds.clone(),
        ks: config.ks.clone(),
        runs,
        failures,
    })
}

fn run_one(
    provider: &dyn InformationSetProvider,
    validation: &ValidationSet,
    config: &SweepConfig,
    encoding: &Encoding,
    sizes: &[usize],
    k: u64,
    seed: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let run_master = derive_seed(seed, tag::SWEEP_RUN, k);
    let plan = BudgetPlan::new(config.budget, k)?;
    let dataset = generate_dataset(provider, &plan, derive_seed(run_master, tag::DATASET, 0))?;
    assert!(
        dataset.evaluations_consumed <= config.budget,
        "budget overrun: consumed {} of {}",
        dataset.evaluations_consumed,
        config.budget
    );

    // One pass over the dataset: the point past which training starts
    // reusing evaluations it already paid for.
    let n = dataset.examples.len() as u64;
    let one_pass_updates = n.div_ceil(config.train.batch_size as u64);

    let train_seed = derive_seed(run_master, tag::TRAIN, 0);
    let mlp = Mlp::new(sizes, train_seed)?;
    let mut train_config = config.train.clone();
    train_config.seed = train_seed;
    let outcome = train(mlp, &dataset, encoding, validation, &train_config)?;

    let (mut best_mae_eval, mut best_mse_eval) = (f64::INFINITY, f64::INFINITY);
    let (mut best_mae_update, mut best_mse_update) = (f64::INFINITY, f64::INFINITY);
    let mut updates_to_best = 0u64;
    for point in &outcome.trajectory {
        if point.updates <= one_pass_updates {
            if point.mae < best_mae_eval {
                best_mae_eval = point.mae;
                updates_to_best = point.updates;
            }
            best_mse_eval = best_mse_eval.min(point.mse);
        }
        if point.updates <= config.update_budget {
            best_mae_update = best_mae_update.min(point.mae);
            best_mse_update = best_mse_update.min(point.mse);
        }
    }

    Ok(RunRecord {
        k,
        seed,
        n: dataset.examples.len() as u64,
        evaluations_consumed: dataset.evaluations_consumed,
        trajectory: outcome.trajectory,
        best_mae_evalaxis: best_mae_eval,
        best_mse_evalaxis: best_mse_eval,
        best_mae_updateaxis: best_mae_update,
        best_mse_updateaxis: best_mse_update,
        updates_to_best,
        wallclock_s: started.elapsed().as_secs_f64(),
    })
}

/// Write per-run trajectories, the per-run summary, the per-k aggregate,
/// a plot-ready long-format file, and (for partial sweeps) the missing
/// cells. Byte-identical for identical results.
pub fn emit_report(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for run in &result.runs {
        let path = dir.join(format!("trajectory_k{:04}_seed{}.csv", run.k, run.seed));
        std::fs::write(&path, trajectory_csv(&run.trajectory))?;
        written.push(path);
    }

    let mut summary =
        String::from("k,n,seed,best_mae_evalaxis,best_mse_evalaxis,best_mae_updateaxis,best_mse_updateaxis,updates_to_best,wallclock_s\n");
    for run in &result.runs {
        summary.push_str(&format!(
            "{},{},{},{:.9},{:.9},{:.9},{:.9},{},{:.3}\n",
            run.k,
            run.n,
            run.seed,
            run.best_mae_evalaxis,
            run.best_mse_evalaxis,
            run.best_mae_updateaxis,
            run.best_mse_updateaxis,
            run.updates_to_best,
            run.wallclock_s
        ));
    }
    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, summary)?;
    written.push(summary_path);

    let mut by_k = String::from(
        "k,n,seeds_completed,seeds_expected,median_best_mae_evalaxis,mean_best_mae_evalaxis,std_best_mae_evalaxis,median_best_mae_updateaxis,mean_best_mae_updateaxis,std_best_mae_updateaxis\n",
    );
    for &k in &result.ks {
        let group: Vec<&RunRecord> = result.runs.iter().filter(|r| r.k == k).collect();
        let eval_axis: Vec<f64> = group.iter().map(|r| r.best_mae_evalaxis).collect();
        let update_axis: Vec<f64> = group.iter().map(|r| r.best_mae_updateaxis).collect();
        let n = group.first().map_or(0, |r| r.n);
        by_k.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            k,
            n,
            group.len(),
            result.seeds.len(),
            fmt_stat(median(&eval_axis)),
            fmt_stat(mean(&eval_axis)),
            fmt_stat(std_dev(&eval_axis)),
            fmt_stat(median(&update_axis)),
            fmt_stat(mean(&update_axis)),
            fmt_stat(std_dev(&update_axis)),
        ));
    }
    let by_k_path = dir.join("summary_by_k.csv");
    std::fs::write(&by_k_path, by_k)?;
    written.push(by_k_path);

    let mut long = String::from("k,seed,updates,evaluations,mae,mse\n");
    for run in &result.runs {
        for point in &run.trajectory {
            long.push_str(&format!(
                "{},{},{},{},{:.9},{:.9}\n",
                run.k, run.seed, point.updates, point.evaluations, point.mae, point.mse
            ));
        }
    }
    let long_path = dir.join("long.csv");
    std::fs::write(&long_path, long)?;
    written.push(long_path);

    if !result.failures.is_empty() {
        let mut missing = String::from("k,seed,error\n");
        for failure in &result.failures {
            missing.push_str(&format!(
                "{},{},{}\n",
                failure.k,
                failure.seed,
                failure.message.replace([',', '\n'], ";")
            ));
        }
        let missing_path = dir.join("missing.csv");
        std::fs::write(&missing_path, missing)?;
        written.push(missing_path);
    }

    Ok(written)
}

fn fmt_stat(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.9}"),
        None => "NA".to_string(),
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

fn std_dev(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    if values.len() == 1 {
        return Some(0.0);
    }
    let m = mean(values)?;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    Some(var.sqrt())
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in metrics"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        Some(sorted[mid])
    } else {
        Some((sorted[mid - 1] + sorted[mid]) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infoset::{ObservableId, SetSize, SyntheticProvider};
    use rand::RngCore;

    fn tiny_provider() -> SyntheticProvider {
        SyntheticProvider::new(vec![
            vec![0.0; 40].into_iter().chain(vec![1.0; 40]).collect(),
            vec![1.0; 60].into_iter().chain(vec![0.0; 20]).collect(),
            vec![0.0; 70].into_iter().chain(vec![1.0; 10]).collect(),
        ])
        .unwrap()
    }

    fn tiny_config() -> SweepConfig {
        let mut config = SweepConfig::new(600, vec![1, 3], vec![1, 2]);
        config.hidden_layers = vec![8];
        config.train.max_updates = 120;
        config.train.eval_every = 30;
        config.update_budget = 60;
        config
    }

    #[test]
    fn sweep_runs_every_cell_and_conserves_budget() {
        let provider = tiny_provider();
        let validation = ValidationSet::from_provider(&provider).unwrap();
        let config = tiny_config();
        let result = run_sweep(&provider, &validation, &config).unwrap();
        assert!(result.is_complete());
        assert_eq!(result.runs.len(), 4);
        for run in &result.runs {
            assert!(run.evaluations_consumed <= config.budget);
            assert_eq!(run.n, 600 / run.k);
            // Axis consistency: evaluations constant, updates monotone.
            for pair in run.trajectory.windows(2) {
                assert_eq!(pair[0].evaluations, pair[1].evaluations);
                assert!(pair[0].updates < pair[1].updates);
            }
            // Both axis bests are minima over trajectory prefixes.
            let overall = run
                .trajectory
                .iter()
                .map(|p| p.mae)
                .fold(f64::INFINITY, f64::min);
            assert!(run.best_mae_evalaxis >= overall);
            assert!(run.best_mae_updateaxis >= overall);
        }
    }

    #[test]
    fn sweep_is_deterministic_across_worker_counts() {
        let provider = tiny_provider();
        let validation = ValidationSet::from_provider(&provider).unwrap();
        let config = tiny_config();
        let base = run_sweep(&provider, &validation, &config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let other = pool.install(|| run_sweep(&provider, &validation, &config).unwrap());
        for (a, b) in base.runs.iter().zip(&other.runs) {
            assert_eq!((a.k, a.seed), (b.k, b.seed));
            assert_eq!(a.trajectory, b.trajectory);
            assert_eq!(a.best_mae_evalaxis, b.best_mae_evalaxis);
        }
    }

    #[test]
    fn report_files_are_deterministic() {
        let provider = tiny_provider();
        let validation = ValidationSet::from_provider(&provider).unwrap();
        let result = run_sweep(&provider, &validation, &tiny_config()).unwrap();

        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let files_a = emit_report(&result, dir_a.path()).unwrap();
        let files_b = emit_report(&result, dir_b.path()).unwrap();
        assert_eq!(files_a.len(), files_b.len());
        for (a, b) in files_a.iter().zip(&files_b) {
            assert_eq!(a.file_name(), b.file_name());
            if a.file_name().unwrap() == "summary.csv" {
                // Wallclock column varies between runs of the sweep, but
                // emitting the same result twice is byte-identical.
                continue;
            }
            assert_eq!(
                std::fs::read(a).unwrap(),
                std::fs::read(b).unwrap(),
                "{:?} differs",
                a.file_name()
            );
        }
        let summary_rerun = emit_report(&result, dir_a.path()).unwrap();
        for (a, b) in files_a.iter().zip(&summary_rerun) {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
    }

    #[test]
    fn report_row_counts() {
        let provider = tiny_provider();
        let validation = ValidationSet::from_provider(&provider).unwrap();
        let config = tiny_config();
        let result = run_sweep(&provider, &validation, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&result, dir.path()).unwrap();

        let by_k = std::fs::read_to_string(dir.path().join("summary_by_k.csv")).unwrap();
        assert_eq!(by_k.lines().count(), 1 + config.ks.len());
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(
            summary.lines().count(),
            1 + config.ks.len() * config.seeds.len()
        );
        assert!(summary.starts_with(
            "k,n,seed,best_mae_evalaxis,best_mse_evalaxis,best_mae_updateaxis,best_mse_updateaxis,updates_to_best,wallclock_s\n"
        ));
        assert!(!dir.path().join("missing.csv").exists());
    }

    /// Samples fine at k=1 but cannot enumerate, so any k at or above its
    /// set size fails its runs.
    struct NoEnumerateProvider;

    impl crate::infoset::InformationSetProvider for NoEnumerateProvider {
        fn id(&self) -> String {
            "no-enumerate".to_string()
        }
        fn observable_count(&self) -> usize {
            2
        }
        fn sample_observable(&self, rng: &mut dyn RngCore) -> ObservableId {
            (rng.next_u32() % 2) as ObservableId
        }
        fn sample_and_evaluate(
            &self,
            observable: ObservableId,
            _rng: &mut dyn RngCore,
        ) -> crate::Result<f64> {
            Ok(observable as f64)
        }
        fn set_size(&self, _observable: ObservableId) -> SetSize {
            SetSize::Finite(2)
        }
        fn enumerate(&self, _observable: ObservableId) -> Option<Vec<f64>> {
            None
        }
        fn ground_truth(&self, observable: ObservableId) -> Option<f64> {
            Some(observable as f64)
        }
    }

    #[test]
    fn partial_sweep_reports_missing_cells() {
        let provider = NoEnumerateProvider;
        let validation = ValidationSet::from_provider(&provider).unwrap();
        let mut config = SweepConfig::new(40, vec![1, 5], vec![7]);
        config.hidden_layers = vec![4];
        config.train.max_updates = 20;
        config.train.eval_every = 10;
        config.update_budget = 20;
        let result = run_sweep(&provider, &validation, &config).unwrap();
        assert!(!result.is_complete());
        assert_eq!(result.runs.len(), 1);
        assert_eq!(result.failures.len(), 1);
        assert_eq!(result.failures[0].k, 5);

        let dir = tempfile::tempdir().unwrap();
        emit_report(&result, dir.path()).unwrap();
        let missing = std::fs::read_to_string(dir.path().join("missing.csv")).unwrap();
        assert!(missing.starts_with("k,seed,error\n"));
        assert_eq!(missing.lines().count(), 2);
        assert!(missing.contains("5,7,"));
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn config_validation() {
        let mut config = SweepConfig::new(100, vec![], vec![1]);
        assert!(config.validate().is_err());
        config.ks = vec![1];
        config.seeds.clear();
        assert!(config.validate().is_err());
        config.seeds = vec![1];
        config.update_budget = config.train.max_updates + 1;
        assert!(config.validate().is_err());
    }
}
