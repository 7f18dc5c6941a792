//! A small multilayer-perceptron regressor trained with mini-batch
//! gradient descent on mean-squared error.
//!
//! Hidden layers use tanh, the output is a sigmoid, all arithmetic is
//! f64. Inputs are encoded observables (one-hot by default); the input
//! layer skips zero entries, which makes one-hot training cheap without a
//! separate sparse path. Analytic gradients are verified against central
//! finite differences by [`grad_check`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::cards::CanonicalHand;
use crate::infoset::{Dataset, InformationSetProvider, ObservableId, PokerProvider};
use crate::rng::{stream_rng, tag};
use crate::{Error, Result};

/// How observables become network inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    /// One input per observable; the default for both providers.
    OneHot { dim: usize },
    /// Compact hole-hand encoding: high-rank one-hot, low-rank one-hot,
    /// suited flag (2R + 1 inputs).
    CompactHand { num_ranks: u8 },
}

impl Encoding {
    pub fn dim(&self) -> usize {
        match self {
            Encoding::OneHot { dim } => *dim,
            Encoding::CompactHand { num_ranks } => 2 * *num_ranks as usize + 1,
        }
    }

    /// Fill `out` (length `dim`) with the encoding of `observable`.
    pub fn encode(&self, observable: ObservableId, out: &mut [f64]) -> Result<()> {
        if out.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "encoding buffer has length {}, expected {}",
                out.len(),
                self.dim()
            )));
        }
        out.fill(0.0);
        match self {
            Encoding::OneHot { dim } => {
                let idx = observable as usize;
                if idx >= *dim {
                    return Err(Error::InvalidInput(format!(
                        "observable {idx} out of range for one-hot dimension {dim}"
                    )));
                }
                out[idx] = 1.0;
            }
            Encoding::CompactHand { num_ranks } => {
                let hand = CanonicalHand::from_index(observable as usize, *num_ranks)?;
                let r = *num_ranks as usize;
                out[hand.high() as usize] = 1.0;
                out[r + hand.low() as usize] = 1.0;
                if hand.suited() {
                    out[2 * r] = 1.0;
                }
            }
        }
        Ok(())
    }
}

/// Feed-forward network parameters. Weight matrices are stored row-major
/// by input (`weights[l][i * out + j]`), so both the forward pass and the
/// gradient accumulation walk contiguous rows per input feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Mlp {
    /// Xavier-uniform initialization, deterministic in `seed`.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Mlp> {
        Mlp::validate_sizes(sizes)?;
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut rng = stream_rng(seed, tag::INIT, l as u64);
            let layer: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..limit))
                .collect();
            weights.push(layer);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// All-zero parameters; the output is exactly sigmoid(0) = 0.5.
    pub fn zeros(sizes: &[usize]) -> Result<Mlp> {
        Mlp::validate_sizes(sizes)?;
        let weights = (0..sizes.len() - 1)
            .map(|l| vec![0.0; sizes[l] * sizes[l + 1]])
            .collect();
        let biases = (0..sizes.len() - 1).map(|l| vec![0.0; sizes[l + 1]]).collect();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    fn validate_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "layer sizes must be at least [input, output] and non-zero, got {sizes:?}"
            )));
        }
        if *sizes.last().unwrap() != 1 {
            return Err(Error::InvalidInput(
                "the regressor has a single output".to_string(),
            ));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Prediction in (0, 1) for one encoded input.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.sizes[0] {
            return Err(Error::InvalidInput(format!(
                "input has length {}, network expects {}",
                input.len(),
                self.sizes[0]
            )));
        }
        let mut scratch = Scratch::new(&self.sizes);
        scratch.activations[0].copy_from_slice(input);
        Ok(self.forward_scratch(&mut scratch))
    }

    /// Forward pass over `scratch.activations[0]`; fills the remaining
    /// activations and returns the output.
    fn forward_scratch(&self, scratch: &mut Scratch) -> f64 {
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (before, after) = scratch.activations.split_at_mut(l + 1);
            let input = &before[l];
            let output = &mut after[0];
            let out_dim = self.sizes[l + 1];
            output.copy_from_slice(&self.biases[l]);
            let w = &self.weights[l];
            for (i, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &w[i * out_dim..(i + 1) * out_dim];
                for (o, &wij) in output.iter_mut().zip(row) {
                    *o += xi * wij;
                }
            }
            if l + 1 < layers {
                for o in output.iter_mut() {
                    *o = o.tanh();
                }
            } else {
                output[0] = sigmoid(output[0]);
            }
        }
        scratch.activations[layers][0]
    }

    /// Backpropagate d(loss)/d(prediction) for the sample currently held
    /// in `scratch` (after `forward_scratch`), accumulating into `grads`.
    fn backward_scratch(&self, d_pred: f64, scratch: &mut Scratch, grads: &mut Gradients) {
        let layers = self.sizes.len() - 1;
        let out = scratch.activations[layers][0];
        scratch.deltas[layers - 1][0] = d_pred * out * (1.0 - out);
        for l in (0..layers).rev() {
            let out_dim = self.sizes[l + 1];
            // Gradients for this layer.
            for (i, &ai) in scratch.activations[l].iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let row = &mut grads.weights[l][i * out_dim..(i + 1) * out_dim];
                for (g, &d) in row.iter_mut().zip(&scratch.deltas[l]) {
                    *g += ai * d;
                }
            }
            for (g, &d) in grads.biases[l].iter_mut().zip(&scratch.deltas[l]) {
                *g += d;
            }
            if l == 0 {
                break;
            }
            // Delta for the previous (tanh) layer.
            let w = &self.weights[l];
            let (prev_deltas, cur_deltas) = scratch.deltas.split_at_mut(l);
            let prev = &mut prev_deltas[l - 1];
            for (i, slot) in prev.iter_mut().enumerate() {
                let row = &w[i * out_dim..(i + 1) * out_dim];
                let mut sum = 0.0;
                for (&wij, &d) in row.iter().zip(cur_deltas[0].iter()) {
                    sum += wij * d;
                }
                let a = scratch.activations[l][i];
                *slot = sum * (1.0 - a * a);
            }
        }
    }

    fn get_param(&self, flat: usize) -> f64 {
        let (kind, l, i) = self.locate(flat);
        match kind {
            ParamKind::Weight => self.weights[l][i],
            ParamKind::Bias => self.biases[l][i],
        }
    }

    fn set_param(&mut self, flat: usize, value: f64) {
        let (kind, l, i) = self.locate(flat);
        match kind {
            ParamKind::Weight => self.weights[l][i] = value,
            ParamKind::Bias => self.biases[l][i] = value,
        }
    }

    fn locate(&self, mut flat: usize) -> (ParamKind, usize, usize) {
        for l in 0..self.weights.len() {
            if flat < self.weights[l].len() {
                return (ParamKind::Weight, l, flat);
            }
            flat -= self.weights[l].len();
            if flat < self.biases[l].len() {
                return (ParamKind::Bias, l, flat);
            }
            flat -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Save a versioned JSON checkpoint.
    pub fn save(&self, path: &Path, config: &TrainConfig) -> Result<()> {
        let checkpoint = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            layer_sizes: self.sizes.clone(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
            config: config.clone(),
        };
        std::fs::write(path, serde_json::to_string(&checkpoint)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Mlp, TrainConfig)> {
        let checkpoint: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if checkpoint.format_version != CHECKPOINT_VERSION {
            return Err(Error::InvalidInput(format!(
                "checkpoint version {} unsupported (expected {})",
                checkpoint.format_version, CHECKPOINT_VERSION
            )));
        }
        let mlp = Mlp {
            sizes: checkpoint.layer_sizes,
            weights: checkpoint.weights,
            biases: checkpoint.biases,
        };
        Mlp::validate_sizes(&mlp.sizes)?;
        Ok((mlp, checkpoint.config))
    }
}

enum ParamKind {
    Weight,
    Bias,
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    config: TrainConfig,
}

/// Per-sample activation and delta buffers.
struct Scratch {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(sizes: &[usize]) -> Scratch {
        Scratch {
            activations: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            deltas: sizes[1..].iter().map(|&s| vec![0.0; s]).collect(),
        }
    }
}

/// Accumulated parameter gradients, same shapes as the network.
struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn new(mlp: &Mlp) -> Gradients {
        Gradients {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn zero(&mut self) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x *= factor);
        }
    }
}

/// Mean squared error of predictions against targets.
pub fn mse_loss(mlp: &Mlp, features: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
    if features.is_empty() || features.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "loss needs a nonempty batch with matching targets, got {} features and {} targets",
            features.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    for (x, &t) in features.iter().zip(targets) {
        let p = mlp.forward(x)?;
        total += (p - t) * (p - t);
    }
    Ok(total / features.len() as f64)
}

/// Optimizer choice; learning rate lives in [`TrainConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn adam() -> OptimizerKind {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

struct AdamState {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    fn new(mlp: &Mlp) -> AdamState {
        AdamState {
            m_weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            t: 0,
        }
    }
}

fn apply_update(
    mlp: &mut Mlp,
    grads: &Gradients,
    config: &TrainConfig,
    adam: &mut Option<AdamState>,
) {
    match &config.optimizer {
        OptimizerKind::Sgd => {
            for l in 0..mlp.weights.len() {
                for (w, &g) in mlp.weights[l].iter_mut().zip(&grads.weights[l]) {
                    *w -= config.learning_rate * g;
                }
                for (b, &g) in mlp.biases[l].iter_mut().zip(&grads.biases[l]) {
                    *b -= config.learning_rate * g;
                }
            }
        }
        OptimizerKind::Adam {
            beta1,
            beta2,
            epsilon,
        } => {
            let state = adam.as_mut().expect("adam state allocated");
            state.t += 1;
            let bc1 = 1.0 - beta1.powi(state.t as i32);
            let bc2 = 1.0 - beta2.powi(state.t as i32);
            let step = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= config.learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            };
            for l in 0..mlp.weights.len() {
                for i in 0..mlp.weights[l].len() {
                    step(
                        &mut mlp.weights[l][i],
                        grads.weights[l][i],
                        &mut state.m_weights[l][i],
                        &mut state.v_weights[l][i],
                    );
                }
                for i in 0..mlp.biases[l].len() {
                    step(
                        &mut mlp.biases[l][i],
                        grads.biases[l][i],
                        &mut state.m_biases[l][i],
                        &mut state.v_biases[l][i],
                    );
                }
            }
        }
    }
}

/// Training hyperparameters. The paper-facing quantities (budget, k) live
/// in the dataset; everything here is artifact plumbing with overridable
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub max_updates: u64,
    pub max_epochs: Option<u64>,
    /// Validate every this many updates.
    pub eval_every: u64,
    /// Stop after this many validations without improvement.
    pub patience: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::adam(),
            max_updates: 50_000,
            max_epochs: None,
            eval_every: 250,
            patience: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || self.learning_rate <= 0.0
            || self.max_updates == 0
            || self.eval_every == 0
            || self.patience == 0
            || self.max_epochs == Some(0)
        {
            return Err(Error::InvalidInput(format!(
                "train config fields must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Observables with known exact means, used only for validation.
#[derive(Debug, Clone)]
pub struct ValidationSet {
    pub observables: Vec<ObservableId>,
    pub targets: Vec<f64>,
    /// Optional per-observable weights for the frequency-weighted metrics;
    /// uniform when absent.
    pub weights: Option<Vec<f64>>,
}

/// Validation error, uniform over observables and frequency-weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mae: f64,
    pub mse: f64,
    pub weighted_mae: f64,
    pub weighted_mse: f64,
}

impl ValidationSet {
    /// Every observable whose ground truth the provider knows.
    pub fn from_provider(provider: &dyn InformationSetProvider) -> Result<ValidationSet> {
        let mut observables = Vec::new();
        let mut targets = Vec::new();
        for x in 0..provider.observable_count() as ObservableId {
            if let Some(truth) = provider.ground_truth(x) {
                observables.push(x);
                targets.push(truth);
            }
        }
        if observables.is_empty() {
            return Err(Error::InvalidInput(
                "provider exposes no ground truth to validate against".to_string(),
            ));
        }
        Ok(ValidationSet {
            observables,
            targets,
            weights: None,
        })
    }

    /// Poker validation set: uniform metrics over the canonical classes
    /// plus deal-frequency weights for the weighted metrics.
    pub fn poker(provider: &PokerProvider) -> Result<ValidationSet> {
        let mut set = ValidationSet::from_provider(provider)?;
        let num_ranks = provider.deck().num_ranks();
        let weights = set
            .observables
            .iter()
            .map(|&x| {
                CanonicalHand::from_index(x as usize, num_ranks)
                    .map(|h| h.class_size() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        set.weights = Some(weights);
        Ok(set)
    }

    pub fn evaluate(&self, mlp: &Mlp, encoding: &Encoding) -> Result<Metrics> {
        let mut scratch = Scratch::new(mlp.layer_sizes());
        let mut abs_sum = 0.0;
        let mut sq_sum = 0.0;
        let mut w_abs = 0.0;
        let mut w_sq = 0.0;
        let mut w_total = 0.0;
        for (i, (&x, &t)) in self.observables.iter().zip(&self.targets).enumerate() {
            encoding.encode(x, &mut scratch.activations[0])?;
            let p = mlp.forward_scratch(&mut scratch);
            let err = (p - t).abs();
            abs_sum += err;
            sq_sum += err * err;
            let w = self.weights.as_ref().map_or(1.0, |w| w[i]);
            w_abs += w * err;
            w_sq += w * err * err;
            w_total += w;
        }
        let n = self.observables.len() as f64;
        Ok(Metrics {
            mae: abs_sum / n,
            mse: sq_sum / n,
            weighted_mae: w_abs / w_total,
            weighted_mse: w_sq / w_total,
        })
    }
}

/// One validation snapshot along a training run. The evaluations
/// coordinate is the dataset's total cost and stays constant; updates
/// increase monotonically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub updates: u64,
    pub evaluations: u64,
    pub mae: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxUpdates,
    MaxEpochs,
    EarlyStopped,
}

/// A finished training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at the best validation MAE.
    pub best_params: Mlp,
    pub final_params: Mlp,
    pub trajectory: Vec<TrajectoryPoint>,
    pub best_mae: f64,
    pub best_mse: f64,
    pub best_updates: u64,
    pub final_metrics: Metrics,
    pub updates_done: u64,
    pub stop: StopReason,
}

pub fn trajectory_csv(trajectory: &[TrajectoryPoint]) -> String {
    let mut out = String::from("updates,evaluations,mae,mse\n");
    for point in trajectory {
        out.push_str(&format!(
            "{},{},{:.9},{:.9}\n",
            point.updates, point.evaluations, point.mae, point.mse
        ));
    }
    out
}

/// Train with shuffled mini-batches until early stopping, the update cap,
/// or the epoch cap. Deterministic in the config seed; single-threaded.
pub fn train(
    mut mlp: Mlp,
    dataset: &Dataset,
    encoding: &Encoding,
    validation: &ValidationSet,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.examples.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".to_string()));
    }
    if encoding.dim() != mlp.input_dim() {
        return Err(Error::InvalidInput(format!(
            "encoding dimension {} does not match network input {}",
            encoding.dim(),
            mlp.input_dim()
        )));
    }

    let evaluations = dataset.evaluations_consumed;
    let mut scratch = Scratch::new(mlp.layer_sizes());
    let mut grads = Gradients::new(&mlp);
    let mut adam = match config.optimizer {
        OptimizerKind::Adam { .. } => Some(AdamState::new(&mlp)),
        OptimizerKind::Sgd => None,
    };

    let initial = validation.evaluate(&mlp, encoding)?;
    let mut trajectory = vec![TrajectoryPoint {
        updates: 0,
        evaluations,
        mae: initial.mae,
        mse: initial.mse,
    }];
    let mut best_mae = initial.mae;
    let mut best_mse = initial.mse;
    let mut best_updates = 0u64;
    let mut best_params = mlp.clone();
    let mut checks_since_improvement = 0u64;

    let mut order: Vec<u32> = (0..dataset.examples.len() as u32).collect();
    let mut updates = 0u64;
    let mut epoch = 0u64;

    let stop = 'training: loop {
        if let Some(max_epochs) = config.max_epochs {
            if epoch >= max_epochs {
                break 'training StopReason::MaxEpochs;
            }
        }
        let mut rng = stream_rng(config.seed, tag::SHUFFLE, epoch);
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }

        for batch in order.chunks(config.batch_size) {
            grads.zero();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let example = &dataset.examples[idx as usize];
                encoding.encode(example.observable, &mut scratch.activations[0])?;
                let pred = mlp.forward_scratch(&mut scratch);
                let residual = pred - example.target;
                batch_loss += residual * residual;
                mlp.backward_scratch(2.0 * residual, &mut scratch, &mut grads);
            }
            batch_loss /= batch.len() as f64;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged { update: updates });
            }
            grads.scale(1.0 / batch.len() as f64);
            apply_update(&mut mlp, &grads, config, &mut adam);
            updates += 1;

            if updates.is_multiple_of(config.eval_every) {
                let metrics = validation.evaluate(&mlp, encoding)?;
                if !metrics.mae.is_finite() {
                    return Err(Error::Diverged { update: updates });
                }
                trajectory.push(TrajectoryPoint {
                    updates,
                    evaluations,
                    mae: metrics.mae,
                    mse: metrics.mse,
                });
                best_mse = best_mse.min(metrics.mse);
                if metrics.mae < best_mae {
                    best_mae = metrics.mae;
                    best_updates = updates;
                    best_params = mlp.clone();
                    checks_since_improvement = 0;
                } else {
                    checks_since_improvement += 1;
                    if checks_since_improvement >= config.patience {
                        break 'training StopReason::EarlyStopped;
                    }
                }
            }
            if updates >= config.max_updates {
                break 'training StopReason::MaxUpdates;
            }
        }
        epoch += 1;
    };

    if !updates.is_multiple_of(config.eval_every) {
        let metrics = validation.evaluate(&mlp, encoding)?;
        trajectory.push(TrajectoryPoint {
            updates,
            evaluations,
            mae: metrics.mae,
            mse: metrics.mse,
        });
        best_mse = best_mse.min(metrics.mse);
        if metrics.mae < best_mae {
            best_mae = metrics.mae;
            best_updates = updates;
            best_params = mlp.clone();
        }
    }

    let final_metrics = validation.evaluate(&mlp, encoding)?;
    Ok(TrainOutcome {
        best_params,
        final_params: mlp,
        trajectory,
        best_mae,
        best_mse,
        best_updates,
        final_metrics,
        updates_done: updates,
        stop,
    })
}

/// Maximum relative error between analytic and central finite-difference
/// gradients over a sample of at least 200 parameters (all of them for
/// small networks).
pub fn grad_check(
    mlp: &Mlp,
    features: &[Vec<f64>],
    targets: &[f64],
    epsilon: f64,
    seed: u64,
) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidInput(format!(
            "epsilon {epsilon} outside [1e-6, 1e-3]"
        )));
    }
    let analytic = analytic_batch_gradient(mlp, features, targets)?;
    let total = mlp.param_count();
    let sample: Vec<usize> = if total <= 200 {
        (0..total).collect()
    } else {
        let mut rng = stream_rng(seed, tag::GRAD_CHECK, 0);
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < 200 {
            picked.insert(rng.gen_range(0..total));
        }
        picked.into_iter().collect()
    };

    let mut worst = 0.0f64;
    let mut probe = mlp.clone();
    for flat in sample {
        let original = probe.get_param(flat);
        probe.set_param(flat, original + epsilon);
        let plus = mse_loss(&probe, features, targets)?;
        probe.set_param(flat, original - epsilon);
        let minus = mse_loss(&probe, features, targets)?;
        probe.set_param(flat, original);
        let numeric = (plus - minus) / (2.0 * epsilon);
        worst = worst.max(gradient_relative_error(analytic[flat], numeric));
    }
    Ok(worst)
}

/// Relative disagreement of two gradient values, guarded for the
/// both-near-zero case.
pub fn gradient_relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6)
}

/// Flat analytic gradient of the batch MSE, in parameter-index order.
pub fn analytic_batch_gradient(
    mlp: &Mlp,
    features: &[Vec<f64>],
    targets: &[f64],
) -> Result<Vec<f64>> {
    if features.is_empty() || features.len() != targets.len() {
        return Err(Error::InvalidInput(
            "gradient needs a nonempty batch with matching targets".to_string(),
        ));
    }
    let mut scratch = Scratch::new(mlp.layer_sizes());
    let mut grads = Gradients::new(mlp);
    for (x, &t) in features.iter().zip(targets) {
        if x.len() != mlp.input_dim() {
            return Err(Error::InvalidInput(format!(
                "input has length {}, network expects {}",
                x.len(),
                mlp.input_dim()
            )));
        }
        scratch.activations[0].copy_from_slice(x);
        let pred = mlp.forward_scratch(&mut scratch);
        mlp.backward_scratch(2.0 * (pred - t), &mut scratch, &mut grads);
    }
    grads.scale(1.0 / features.len() as f64);

    let mut flat = Vec::with_capacity(mlp.param_count());
    for l in 0..grads.weights.len() {
        flat.extend_from_slice(&grads.weights[l]);
        flat.extend_from_slice(&grads.biases[l]);
    }
    Ok(flat)
}
