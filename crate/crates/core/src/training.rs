//! Loss, metrics, Adam, the training loop, evaluation, and the k-sweep.
//!
//! One epoch builds a single tape over every training snapshot with one set
//! of staged parameter leaves, accumulates the mean per-snapshot MSE into one
//! scalar, runs one backward pass, and takes one optimizer step. There is no
//! randomness in the loop itself; with a fixed seed the entire run, including
//! initialization, is bit-reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, Tape, Tensor};
use crate::dataset::{temporal_split, DatasetError, TemporalGraphDataset};
use crate::graph::GraphSnapshot;
use crate::model::{
    HeadParams, ModelError, ModelVariant, StagedModel, TempoKgatParams,
};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("config: {field} must satisfy {requirement}")]
    InvalidConfig {
        field: &'static str,
        requirement: &'static str,
    },
    #[error("metrics: inputs must be non-empty and equal length (got {left} vs {right})")]
    MetricsInput { left: usize, right: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("non-finite gradient in parameter {param} at coordinate {coord}")]
    NonFiniteGradient { param: usize, coord: usize },
    #[error("adam: {params} parameter sets but {grads} gradient sets")]
    AdamArity { params: usize, grads: usize },
    #[error("adam: parameter {param} has {actual} values, state tracks {expected}")]
    AdamShape {
        param: usize,
        expected: usize,
        actual: usize,
    },
    #[error("relative improvement is undefined for a zero baseline")]
    ZeroBaseline,
    #[error("evaluation requires at least one snapshot")]
    EmptyEvaluation,
}

type Result<V> = std::result::Result<V, TrainError>;

/// Pooled forecast-error metrics over `n` (node, snapshot) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub mae: T,
    pub mse: T,
    pub rmse: T,
    pub n: usize,
}

/// MAE, MSE, and RMSE (= sqrt of MSE) over pooled prediction pairs.
pub fn compute_metrics<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<Metrics<T>> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(TrainError::MetricsInput {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let n = T::from_usize(y_true.len());
    let mut abs_sum = T::zero();
    let mut sq_sum = T::zero();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let diff = t - p;
        abs_sum += diff.abs();
        sq_sum += diff * diff;
    }
    let mae = abs_sum / n;
    let mse = sq_sum / n;
    let rmse = mse.sqrt();
    debug_assert!((rmse * rmse - mse).abs() <= T::from_f64(1e-12) * mse.max(T::one()));
    Ok(Metrics {
        mae,
        mse,
        rmse,
        n: y_true.len(),
    })
}

/// Differentiable mean squared error between equal-shape tensors.
pub fn mse_loss<T: Scalar>(
    tape: &mut Tape<T>,
    y_pred: &Tensor,
    y_true: &Tensor,
) -> std::result::Result<Tensor, AutodiffError> {
    let diff = tape.sub(y_pred, y_true)?;
    let sq = tape.hadamard(&diff, &diff)?;
    let total = tape.reduce_sum(&sq, None)?;
    tape.scale_const(&total, T::one() / T::from_usize(y_pred.len()))
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> AdamConfig<T> {
    pub fn with_lr(lr: T) -> Self {
        Self {
            lr,
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            epsilon: T::from_f64(1e-8),
        }
    }
}

/// Per-parameter first/second moment accumulators and the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    config: AdamConfig<T>,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig<T>, sizes: &[usize]) -> Self {
        Self {
            config,
            m: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
            v: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update across all parameter sets.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(TrainError::AdamArity {
                params: params.len(),
                grads: grads.len(),
            });
        }
        for (idx, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != g.len() || p.len() != self.m[idx].len() {
                return Err(TrainError::AdamShape {
                    param: idx,
                    expected: self.m[idx].len(),
                    actual: p.len(),
                });
            }
            if let Some(coord) = g.iter().position(|v| !v.is_finite()) {
                return Err(TrainError::NonFiniteGradient { param: idx, coord });
            }
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let one = T::one();
        let bias1 = one - beta1.powi(self.step as i32);
        let bias2 = one - beta2.powi(self.step as i32);
        for (idx, (param, grad)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for ((theta, &g), (mi, vi)) in param
                .iter_mut()
                .zip(grad.iter())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = beta1 * *mi + (one - beta1) * g;
                *vi = beta2 * *vi + (one - beta2) * g * g;
                let m_hat = *mi / bias1;
                let v_hat = *vi / bias2;
                *theta -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub variant: ModelVariant,
    pub k: usize,
    pub lambda: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub train_ratio: f64,
    pub leaky_slope: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: ModelVariant::TempoKgat,
            k: 1,
            lambda: 0.1,
            hidden: 32,
            epochs: 200,
            lr: 0.001,
            seed: 42,
            train_ratio: 0.8,
            leaky_slope: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(TrainError::InvalidConfig {
                field: "k",
                requirement: ">= 1",
            });
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(TrainError::InvalidConfig {
                field: "lambda",
                requirement: "finite and >= 0",
            });
        }
        if self.hidden == 0 {
            return Err(TrainError::InvalidConfig {
                field: "hidden",
                requirement: ">= 1",
            });
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig {
                field: "epochs",
                requirement: ">= 1",
            });
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(TrainError::InvalidConfig {
                field: "lr",
                requirement: "> 0",
            });
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(TrainError::InvalidConfig {
                field: "train_ratio",
                requirement: "in (0, 1)",
            });
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(TrainError::InvalidConfig {
                field: "leaky_slope",
                requirement: "in (0, 1)",
            });
        }
        Ok(())
    }
}

/// One epoch of the loop: the loss actually optimized, plus test metrics
/// when the caller evaluates mid-training.
#[derive(Debug, Clone)]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub train_loss: T,
    pub test_metrics: Option<Metrics<T>>,
}

/// Trained layer and head parameters.
#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub layer: TempoKgatParams<T>,
    pub head: HeadParams<T>,
}

/// Seeded Glorot-style uniform initialization: every weight is drawn from
/// ±sqrt(6 / (fan_in + fan_out)) in the fixed order layer weight, attention
/// vector, head weight; biases start at zero.
pub fn init_params<T: Scalar>(config: &TrainConfig, in_features: usize) -> Result<TrainedModel<T>> {
    config.validate()?;
    let f_in = in_features;
    let f_out = config.hidden;
    let mut rng = SplitMix64::new(config.seed);
    let mut draw = |count: usize, limit: f64| -> Vec<T> {
        (0..count)
            .map(|_| T::from_f64(rng.uniform(-limit, limit)))
            .collect()
    };
    let w_limit = (6.0 / (f_in + f_out) as f64).sqrt();
    let weight = draw(f_out * f_in, w_limit);
    let a_limit = (6.0 / (2 * f_out + 1) as f64).sqrt();
    let attention = draw(2 * f_out, a_limit);
    let head_limit = (6.0 / (f_out + 1) as f64).sqrt();
    let head_weight = draw(f_out, head_limit);

    let layer = TempoKgatParams::new(
        weight,
        attention,
        f_in,
        f_out,
        T::from_f64(config.lambda),
        config.k,
        T::from_f64(config.leaky_slope),
    )?;
    Ok(TrainedModel {
        layer,
        head: HeadParams::new(head_weight, T::zero()),
    })
}

/// Mean per-snapshot MSE over `snapshots`, built on one tape with shared
/// parameter leaves. Returns the scalar loss tensor.
fn accumulated_loss<T: Scalar>(
    tape: &mut Tape<T>,
    staged: &StagedModel<T>,
    snapshots: &[GraphSnapshot<T>],
) -> Result<Tensor> {
    let mut losses = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let (pred, _) = staged.forward(tape, snap)?;
        let truth = tape.leaf(snap.targets().to_vec(), &[snap.num_nodes()])?;
        losses.push(mse_loss(tape, &pred, &truth)?);
    }
    let stacked = tape.concat1d(&losses)?;
    let total = tape.reduce_sum(&stacked, None)?;
    Ok(tape.scale_const(&total, T::one() / T::from_usize(snapshots.len()))?)
}

/// Trains on the chronological train split of `dataset` per `config`.
pub fn train<T: Scalar>(
    dataset: &TemporalGraphDataset<T>,
    config: &TrainConfig,
) -> Result<(TrainedModel<T>, Vec<EpochRecord<T>>)> {
    config.validate()?;
    let (train_snaps, _test) = temporal_split(dataset, config.train_ratio)?;
    let mut model = init_params::<T>(config, dataset.lags())?;

    let sizes = [
        model.layer.weight.len(),
        model.layer.attention.len(),
        model.head.weight.len(),
        1,
    ];
    let mut adam = AdamState::new(AdamConfig::with_lr(T::from_f64(config.lr)), &sizes);
    let mut records = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let mut tape = Tape::new();
        let staged = StagedModel::stage(&mut tape, &model.layer, &model.head, config.variant)?;
        let loss = accumulated_loss(&mut tape, &staged, train_snaps)?;
        let loss_value = tape.item(&loss);
        if !loss_value.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        tape.backward(&loss)?;

        let grad_w = tape.grad(&staged.weight)?.to_vec();
        let grad_a = tape.grad(&staged.attention)?.to_vec();
        let grad_hw = tape.grad(&staged.head_weight)?.to_vec();
        let grad_hb = tape.grad(&staged.head_bias)?.to_vec();

        let mut bias_slot = [model.head.bias];
        adam.step(
            &mut [
                &mut model.layer.weight,
                &mut model.layer.attention,
                &mut model.head.weight,
                &mut bias_slot,
            ],
            &[&grad_w, &grad_a, &grad_hw, &grad_hb],
        )?;
        model.head.bias = bias_slot[0];

        records.push(EpochRecord {
            epoch,
            train_loss: loss_value,
            test_metrics: None,
        });
    }
    Ok((model, records))
}

/// Pools predictions over all (node, snapshot) pairs, then computes metrics
/// once.
pub fn evaluate<T: Scalar>(
    model: &TrainedModel<T>,
    snapshots: &[GraphSnapshot<T>],
    variant: ModelVariant,
) -> Result<Metrics<T>> {
    if snapshots.is_empty() {
        return Err(TrainError::EmptyEvaluation);
    }
    let mut y_true = Vec::new();
    let mut y_pred = Vec::new();
    for snap in snapshots {
        let mut tape = Tape::new();
        let staged = StagedModel::stage(&mut tape, &model.layer, &model.head, variant)?;
        let (pred, _) = staged.forward(&mut tape, snap)?;
        y_pred.extend_from_slice(tape.values(&pred));
        y_true.extend_from_slice(snap.targets());
    }
    compute_metrics(&y_true, &y_pred)
}

/// Train on the chronological split, then evaluate on the held-out tail.
#[allow(clippy::type_complexity)]
pub fn train_and_evaluate<T: Scalar>(
    dataset: &TemporalGraphDataset<T>,
    config: &TrainConfig,
) -> Result<(TrainedModel<T>, Vec<EpochRecord<T>>, Metrics<T>)> {
    let (model, records) = train(dataset, config)?;
    let (_train, test) = temporal_split(dataset, config.train_ratio)?;
    let metrics = evaluate(&model, test, config.variant)?;
    Ok((model, records, metrics))
}

/// 100 * (baseline - candidate) / baseline.
pub fn relative_improvement<T: Scalar>(baseline: T, candidate: T) -> Result<T> {
    if baseline == T::zero() {
        return Err(TrainError::ZeroBaseline);
    }
    Ok(T::from_f64(100.0) * (baseline - candidate) / baseline)
}

/// Default sweep range: 1 ..= round(average in-degree), at least 1.
pub fn default_k_range<T: Scalar>(dataset: &TemporalGraphDataset<T>) -> Vec<usize> {
    let upper = (dataset.average_in_degree().round() as usize).max(1);
    (1..=upper).collect()
}

/// One record per swept k, in input order.
#[derive(Debug)]
pub struct KSweepRecord<T> {
    pub k: usize,
    pub result: Result<Metrics<T>>,
}

/// Trains and evaluates once per k, all from the same base config and seed.
/// Failures are recorded per k rather than aborting the sweep.
pub fn sweep_k<T: Scalar>(
    dataset: &TemporalGraphDataset<T>,
    base: &TrainConfig,
    k_values: Option<&[usize]>,
) -> Vec<KSweepRecord<T>> {
    let ks: Vec<usize> = match k_values {
        Some(list) => list.to_vec(),
        None => default_k_range(dataset),
    };
    ks.into_iter()
        .map(|k| {
            let config = TrainConfig { k, ..base.clone() };
            KSweepRecord {
                k,
                result: train_and_evaluate(dataset, &config).map(|(_, _, m)| m),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_lagged_snapshots, generate_synthetic, SyntheticConfig, TemporalNature};

    fn small_dataset(seed: u64) -> TemporalGraphDataset<f64> {
        generate_synthetic(&SyntheticConfig {
            num_nodes: 5,
            num_snapshots: 12,
            lags: 3,
            seed,
            edge_density: 0.6,
        })
        .unwrap()
    }

    fn fast_config() -> TrainConfig {
        TrainConfig {
            hidden: 8,
            epochs: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn metrics_perfect_prediction() {
        let m = compute_metrics(&[1.0, -2.0, 0.5], &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!((m.mae, m.mse, m.rmse), (0.0, 0.0, 0.0));
        assert_eq!(m.n, 3);
    }

    #[test]
    fn metrics_unit_errors() {
        let m = compute_metrics(&[0.0, 0.0], &[1.0, -1.0]).unwrap();
        assert_eq!((m.mae, m.mse, m.rmse), (1.0, 1.0, 1.0));
    }

    #[test]
    fn metrics_rmse_is_sqrt_of_mse() {
        // reported-value consistency: mse 1.1717 must give rmse 1.0825
        let m = compute_metrics(&[0.0], &[1.1717f64.sqrt()]).unwrap();
        assert!((m.mse - 1.1717).abs() < 1e-12);
        assert!((m.rmse - 1.0825).abs() < 5e-4);

        let m = compute_metrics(&[0.0], &[1.0017f64.sqrt()]).unwrap();
        assert!((m.rmse - 1.0008).abs() < 5e-4);
    }

    #[test]
    fn metrics_reject_bad_input() {
        assert!(compute_metrics::<f64>(&[], &[]).is_err());
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn metrics_permutation_invariant() {
        let t = [0.5, -1.0, 2.0, 0.25];
        let p = [0.0, -1.5, 2.5, 0.5];
        let a = compute_metrics(&t, &p).unwrap();
        let perm = [2usize, 0, 3, 1];
        let tp: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let b = compute_metrics(&tp, &pp).unwrap();
        assert!((a.mae - b.mae).abs() < 1e-15);
        assert!((a.mse - b.mse).abs() < 1e-15);
    }

    #[test]
    fn mse_loss_values_and_gradient() {
        let mut tape = Tape::<f64>::new();
        let p = tape.leaf(vec![1.0, 2.0], &[2]).unwrap();
        let t = tape.leaf(vec![1.0, 2.0], &[2]).unwrap();
        let loss = mse_loss(&mut tape, &p, &t).unwrap();
        assert_eq!(tape.item(&loss), 0.0);
        tape.backward(&loss).unwrap();
        assert_eq!(tape.grad(&p).unwrap(), &[0.0, 0.0]);

        let mut tape = Tape::<f64>::new();
        let p = tape.leaf(vec![1.0, 2.0, 3.0], &[3]).unwrap();
        let t = tape.leaf(vec![0.0, 1.0, 2.0], &[3]).unwrap();
        let loss = mse_loss(&mut tape, &p, &t).unwrap();
        assert!((tape.item(&loss) - 1.0).abs() < 1e-15);
        tape.backward(&loss).unwrap();
        // d/dp = 2 (p - t) / n
        for &g in tape.grad(&p).unwrap() {
            assert!((g - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mse_loss_gradient_matches_finite_differences() {
        let report = crate::autodiff::grad_check(
            |tape, leaves| {
                let t = tape.leaf(vec![0.4, -0.2, 0.9], &[3])?;
                mse_loss(tape, &leaves[0], &t)
            },
            &[(vec![0.1, 0.7, -0.5], vec![3])],
            1e-6,
        )
        .unwrap();
        assert!(report.max_rel_err < 1e-7);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut state = AdamState::new(AdamConfig::with_lr(0.001), &[1]);
        let mut theta = [0.0f64];
        state.step(&mut [&mut theta], &[&[1.0]]).unwrap();
        assert!((theta[0] - (-0.001)).abs() < 1e-8, "theta {}", theta[0]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_zero_gradient_fresh_state() {
        let mut state = AdamState::new(AdamConfig::with_lr(0.001), &[2]);
        let mut theta = [0.7f64, -0.3];
        state.step(&mut [&mut theta], &[&[0.0, 0.0]]).unwrap();
        assert_eq!(theta, [0.7, -0.3]);
    }

    #[test]
    fn adam_identical_problems_identical_trajectories() {
        let mut s1 = AdamState::new(AdamConfig::with_lr(0.01), &[1]);
        let mut s2 = AdamState::new(AdamConfig::with_lr(0.01), &[1]);
        let mut t1 = [1.0f64];
        let mut t2 = [1.0f64];
        for step in 0..20 {
            let g = [2.0 * t1[0] + step as f64 * 0.01];
            s1.step(&mut [&mut t1], &[&g]).unwrap();
            let g = [2.0 * t2[0] + step as f64 * 0.01];
            s2.step(&mut [&mut t2], &[&g]).unwrap();
            assert_eq!(t1[0].to_bits(), t2[0].to_bits());
        }
    }

    #[test]
    fn adam_zero_lr_updates_only_state() {
        let mut state = AdamState::new(AdamConfig::with_lr(0.0), &[2]);
        let mut theta = [0.5f64, -0.5];
        state.step(&mut [&mut theta], &[&[1.0, -2.0]]).unwrap();
        assert_eq!(theta, [0.5, -0.5]);
        assert_eq!(state.step_count(), 1);
        assert!(state.m[0][0] != 0.0);
        assert!(state.v[0][1] != 0.0);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut state = AdamState::new(AdamConfig::with_lr(0.001), &[2]);
        let mut theta = [0.0f64, 0.0];
        let err = state
            .step(&mut [&mut theta], &[&[1.0, f64::NAN]])
            .unwrap_err();
        assert!(matches!(
            err,
            TrainError::NonFiniteGradient { param: 0, coord: 1 }
        ));
    }

    #[test]
    fn train_single_epoch_contract() {
        let ds = small_dataset(1);
        let config = TrainConfig {
            epochs: 1,
            ..fast_config()
        };
        let init = init_params::<f64>(&config, ds.lags()).unwrap();
        let (model, records) = train(&ds, &config).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].epoch, 1);
        assert!(records[0].train_loss.is_finite());
        // exactly one optimizer step moved the parameters
        assert_ne!(model.layer.weight, init.layer.weight);
    }

    #[test]
    fn train_is_deterministic() {
        let ds = small_dataset(2);
        let config = TrainConfig {
            epochs: 10,
            ..fast_config()
        };
        let (m1, r1) = train(&ds, &config).unwrap();
        let (m2, r2) = train(&ds, &config).unwrap();
        assert_eq!(m1.layer.weight, m2.layer.weight);
        assert_eq!(m1.layer.attention, m2.layer.attention);
        assert_eq!(m1.head.weight, m2.head.weight);
        assert_eq!(m1.head.bias.to_bits(), m2.head.bias.to_bits());
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
        }
    }

    #[test]
    fn constant_target_reaches_low_loss() {
        // constant series: a bias-only exact solution exists
        let series: Vec<Vec<f64>> = (0..20).map(|_| vec![0.2; 4]).collect();
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0)];
        let weights = vec![0.5; 4];
        let snaps = build_lagged_snapshots(&series, 2, &edges, &weights).unwrap();
        let ds = TemporalGraphDataset::new(
            "constant".into(),
            TemporalNature::Static,
            4,
            2,
            snaps,
        )
        .unwrap();
        let config = TrainConfig {
            hidden: 8,
            epochs: 200,
            ..TrainConfig::default()
        };
        let (_, records) = train(&ds, &config).unwrap();
        let final_loss = records.last().unwrap().train_loss;
        assert!(final_loss < 0.01, "final training MSE {final_loss}");
        assert!(records.iter().all(|r| r.train_loss.is_finite()));
    }

    #[test]
    fn evaluate_exact_and_pooled() {
        let ds = small_dataset(3);
        let (_, test) = temporal_split(&ds, 0.8).unwrap();

        // a model that ignores the graph: zero weights, bias only
        let layer = TempoKgatParams::new(
            vec![0.0; 8 * 3],
            vec![0.0; 16],
            3,
            8,
            0.1,
            1,
            0.2,
        )
        .unwrap();
        let model = TrainedModel {
            layer,
            head: HeadParams::new(vec![0.0; 8], 0.25),
        };
        let metrics = evaluate(&model, test, ModelVariant::TempoKgat).unwrap();

        // oracle: pooled manually
        let mut y_true = Vec::new();
        let mut y_pred = Vec::new();
        for snap in test {
            y_true.extend_from_slice(snap.targets());
            y_pred.extend(std::iter::repeat_n(0.25, snap.num_nodes()));
        }
        let oracle = compute_metrics(&y_true, &y_pred).unwrap();
        assert_eq!(metrics, oracle);
        assert_eq!(metrics.n, test.len() * ds.num_nodes());
    }

    #[test]
    fn evaluate_exact_predictions_zero_metrics() {
        // constant dataset: a bias-only model hits every target exactly
        let series: Vec<Vec<f64>> = (0..10).map(|_| vec![0.2; 3]).collect();
        let snaps = build_lagged_snapshots(&series, 2, &[], &[]).unwrap();
        let ds = TemporalGraphDataset::new(
            "c".into(),
            TemporalNature::Static,
            3,
            2,
            snaps,
        )
        .unwrap();
        let layer =
            TempoKgatParams::new(vec![0.0; 8], vec![0.0; 8], 2, 4, 0.0, 1, 0.2).unwrap();
        let model = TrainedModel {
            layer,
            head: HeadParams::new(vec![0.0; 4], 0.2),
        };
        let metrics = evaluate(&model, ds.snapshots(), ModelVariant::TempoKgat).unwrap();
        assert_eq!((metrics.mae, metrics.mse, metrics.rmse), (0.0, 0.0, 0.0));
    }

    #[test]
    fn evaluate_single_pair() {
        let series: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![2.0]];
        let snaps = build_lagged_snapshots(&series, 1, &[], &[]).unwrap();
        let ds = TemporalGraphDataset::new(
            "one".into(),
            TemporalNature::Static,
            1,
            1,
            snaps,
        )
        .unwrap();
        let (_, test) = temporal_split(&ds, 0.5).unwrap();
        assert_eq!(test.len(), 1);
        let layer =
            TempoKgatParams::new(vec![0.0; 4], vec![0.0; 8], 1, 4, 0.0, 1, 0.2).unwrap();
        let model = TrainedModel {
            layer,
            head: HeadParams::new(vec![0.0; 4], 1.5),
        };
        let metrics = evaluate(&model, test, ModelVariant::Gat).unwrap();
        // single node, target 2.0, prediction 1.5
        assert!((metrics.mae - 0.5).abs() < 1e-15);
        assert!((metrics.mse - 0.25).abs() < 1e-15);
        assert_eq!(metrics.n, 1);
    }

    #[test]
    fn relative_improvement_reported_values() {
        let p = relative_improvement(1.0948f64, 0.7476).unwrap();
        assert!((p - 31.71).abs() < 0.01, "got {p}");
        let p = relative_improvement(1.8247f64, 1.1717).unwrap();
        assert!((p - 35.79).abs() < 0.02, "got {p}");
        let p = relative_improvement(0.7, 0.7).unwrap();
        assert_eq!(p, 0.0);
        assert!(matches!(
            relative_improvement(0.0, 1.0),
            Err(TrainError::ZeroBaseline)
        ));
    }

    #[test]
    fn sweep_default_range_tracks_average_degree() {
        // 12 nodes, complete digraph: 132 edges, average in-degree 11
        let ds: TemporalGraphDataset<f64> = generate_synthetic(&SyntheticConfig {
            num_nodes: 12,
            num_snapshots: 6,
            lags: 2,
            seed: 4,
            edge_density: 1.0,
        })
        .unwrap();
        assert!((ds.average_in_degree() - 11.0).abs() < 1e-12);
        assert_eq!(default_k_range(&ds), (1..=11).collect::<Vec<_>>());
    }

    #[test]
    fn sweep_records_follow_input_order() {
        let ds = small_dataset(6);
        let config = TrainConfig {
            epochs: 2,
            hidden: 4,
            ..TrainConfig::default()
        };
        let records = sweep_k(&ds, &config, Some(&[1]));
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].k, 1);
        assert!(records[0].result.is_ok());

        let records = sweep_k(&ds, &config, Some(&[3, 1, 2]));
        let ks: Vec<usize> = records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![3, 1, 2]);
        for r in &records {
            let m = r.result.as_ref().unwrap();
            assert!(m.rmse.is_finite());
        }
    }

    #[test]
    fn config_validation() {
        let c = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            c.validate(),
            Err(TrainError::InvalidConfig { field: "epochs", .. })
        ));
        let c = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            train_ratio: 1.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
