//! The temporal graph attention layer and its plain-GAT baseline.
//!
//! Per snapshot the layer runs: time-decay the lag features, select each
//! node's top-k in-neighbors by edge weight, score them with additive
//! attention (LeakyReLU + softmax over the selected set), then aggregate the
//! transformed neighbor features scaled by softmax weight times edge weight.
//! The baseline keeps the same attention but drops the decay, the pruning,
//! and the edge-weight factor, which is exactly the regime where both layers
//! coincide. A ReLU + linear head maps hidden rows to one forecast per node.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::autodiff::{AutodiffError, Tape, Tensor};
use crate::graph::{GraphError, GraphSnapshot, NeighborIndex};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("params: {field} must satisfy {requirement}")]
    InvalidParam {
        field: &'static str,
        requirement: &'static str,
    },
    #[error("params: weight matrix holds {actual} values, expected {expected} ({out_features} x {in_features})")]
    WeightLength {
        expected: usize,
        actual: usize,
        out_features: usize,
        in_features: usize,
    },
    #[error("params: attention vector holds {actual} values, expected {expected}")]
    AttentionLength { expected: usize, actual: usize },
    #[error("head: weight holds {actual} values, expected {expected}")]
    HeadLength { expected: usize, actual: usize },
    #[error("snapshot has {actual} features per node, layer expects {expected}")]
    FeatureWidth { expected: usize, actual: usize },
    #[error("decay vector length {decay} does not match feature width {features}")]
    DecayLength { decay: usize, features: usize },
    #[error("node {node}: attention requires a non-empty selected neighborhood")]
    EmptySelection { node: usize },
}

type Result<V> = std::result::Result<V, ModelError>;

/// Which layer drives the forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    TempoKgat,
    Gat,
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVariant::TempoKgat => write!(f, "tempokgat"),
            ModelVariant::Gat => write!(f, "gat"),
        }
    }
}

impl FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tempokgat" => Ok(ModelVariant::TempoKgat),
            "gat" => Ok(ModelVariant::Gat),
            other => Err(format!("unknown model variant '{other}' (expected tempokgat or gat)")),
        }
    }
}

/// Learnable layer parameters plus the hyperparameters that shape them.
///
/// `weight` is `F' x F` row-major, `attention` has length `2 F'`. The decay
/// rate and `k` are fixed hyperparameters, not trained.
#[derive(Debug, Clone)]
pub struct TempoKgatParams<T> {
    pub weight: Vec<T>,
    pub attention: Vec<T>,
    pub in_features: usize,
    pub out_features: usize,
    pub lambda: T,
    pub k: usize,
    pub leaky_slope: T,
}

impl<T: Scalar> TempoKgatParams<T> {
    pub fn new(
        weight: Vec<T>,
        attention: Vec<T>,
        in_features: usize,
        out_features: usize,
        lambda: T,
        k: usize,
        leaky_slope: T,
    ) -> Result<Self> {
        if in_features == 0 {
            return Err(ModelError::InvalidParam {
                field: "in_features",
                requirement: ">= 1",
            });
        }
        if out_features == 0 {
            return Err(ModelError::InvalidParam {
                field: "out_features",
                requirement: ">= 1",
            });
        }
        if !(lambda.is_finite() && lambda >= T::zero()) {
            return Err(ModelError::InvalidParam {
                field: "lambda",
                requirement: "finite and >= 0",
            });
        }
        if k == 0 {
            return Err(ModelError::InvalidParam {
                field: "k",
                requirement: ">= 1",
            });
        }
        if !(leaky_slope > T::zero() && leaky_slope < T::one()) {
            return Err(ModelError::InvalidParam {
                field: "leaky_slope",
                requirement: "in (0, 1)",
            });
        }
        if weight.len() != out_features * in_features {
            return Err(ModelError::WeightLength {
                expected: out_features * in_features,
                actual: weight.len(),
                out_features,
                in_features,
            });
        }
        if attention.len() != 2 * out_features {
            return Err(ModelError::AttentionLength {
                expected: 2 * out_features,
                actual: attention.len(),
            });
        }
        Ok(Self {
            weight,
            attention,
            in_features,
            out_features,
            lambda,
            k,
            leaky_slope,
        })
    }
}

/// Forecasting head: a `1 x F'` linear map plus a scalar bias.
#[derive(Debug, Clone)]
pub struct HeadParams<T> {
    pub weight: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> HeadParams<T> {
    pub fn new(weight: Vec<T>, bias: T) -> Self {
        Self { weight, bias }
    }
}

/// Per-column decay factors for lag features ordered oldest -> newest:
/// column `f` sits `F - 1 - f` steps in the past and is scaled by
/// `exp(-lambda * offset)`. The newest column always keeps factor 1, and the
/// factors are non-decreasing left to right.
#[derive(Debug, Clone)]
pub struct DecayVector<T> {
    offsets: Vec<T>,
    factors: Vec<T>,
}

impl<T: Scalar> DecayVector<T> {
    pub fn new(lags: usize, lambda: T) -> Self {
        let mut offsets = Vec::with_capacity(lags);
        let mut factors = Vec::with_capacity(lags);
        for f in 0..lags {
            let t = T::from_usize(lags - 1 - f);
            offsets.push(t);
            factors.push((-lambda * t).exp());
        }
        Self { offsets, factors }
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    pub fn factors(&self) -> &[T] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Row-wise product of the feature matrix with the decay factors.
pub fn apply_time_decay<T: Scalar>(
    tape: &mut Tape<T>,
    features: &Tensor,
    decay: &DecayVector<T>,
) -> Result<Tensor> {
    if features.rank() != 2 || features.shape()[1] != decay.len() {
        return Err(ModelError::DecayLength {
            decay: decay.len(),
            features: if features.rank() == 2 {
                features.shape()[1]
            } else {
                features.len()
            },
        });
    }
    let d = tape.leaf(decay.factors().to_vec(), &[decay.len()])?;
    Ok(tape.hadamard(features, &d)?)
}

/// Softmax attention over a selected neighborhood.
///
/// `transformed` is the `N x F'` matrix of already-transformed (and decayed)
/// node features; the raw score for neighbor `j` is
/// `leaky_relu(a . [h_i || h_j])`. Returns the normalized coefficients and
/// the raw scores, both parallel to `selected`.
pub fn attention_coefficients<T: Scalar>(
    tape: &mut Tape<T>,
    node: usize,
    selected: &[(usize, T)],
    transformed: &Tensor,
    attention: &Tensor,
    leaky_slope: T,
) -> Result<(Tensor, Tensor)> {
    if selected.is_empty() {
        return Err(ModelError::EmptySelection { node });
    }
    let h_i = tape.row(transformed, node)?;
    let mut scores = Vec::with_capacity(selected.len());
    for &(j, _) in selected {
        let h_j = tape.row(transformed, j)?;
        let cat = tape.concat_pair(&h_i, &h_j)?;
        let prod = tape.hadamard(attention, &cat)?;
        let dot = tape.reduce_sum(&prod, None)?;
        scores.push(tape.leaky_relu(&dot, leaky_slope)?);
    }
    let raw = tape.concat1d(&scores)?;
    let alpha = tape.softmax_vec(&raw)?;
    Ok((alpha, raw))
}

/// Aggregates the selected neighbors' transformed features, weighting each
/// by its attention coefficient and, when `edge_weighted`, by its edge
/// weight. An empty selection yields the zero vector.
pub fn aggregate_node<T: Scalar>(
    tape: &mut Tape<T>,
    selected: &[(usize, T)],
    alpha: &Tensor,
    transformed: &Tensor,
    edge_weighted: bool,
) -> Result<Tensor> {
    let out_features = transformed.shape()[1];
    if selected.is_empty() {
        return Ok(tape.zeros(&[out_features]));
    }
    let coeffs = if edge_weighted {
        let w: Vec<T> = selected.iter().map(|&(_, w)| w).collect();
        let w_leaf = tape.leaf(w, &[selected.len()])?;
        tape.hadamard(alpha, &w_leaf)?
    } else {
        alpha.clone()
    };
    let mut rows = Vec::with_capacity(selected.len());
    for &(j, _) in selected {
        rows.push(tape.row(transformed, j)?);
    }
    let stacked_flat = tape.concat1d(&rows)?;
    let stacked = tape.reshape(&stacked_flat, &[selected.len(), out_features])?;
    let coeff_row = tape.reshape(&coeffs, &[1, selected.len()])?;
    let combined = tape.matmul(&coeff_row, &stacked)?;
    Ok(tape.reshape(&combined, &[out_features])?)
}

/// Layer hyperparameters split out from the learnable values so a forward
/// pass can run against parameter leaves staged elsewhere on the tape.
#[derive(Debug, Clone)]
pub struct ModelHyper<T> {
    pub variant: ModelVariant,
    pub in_features: usize,
    pub out_features: usize,
    pub lambda: T,
    pub k: usize,
    pub leaky_slope: T,
}

impl<T: Scalar> ModelHyper<T> {
    pub fn from_params(params: &TempoKgatParams<T>, variant: ModelVariant) -> Self {
        Self {
            variant,
            in_features: params.in_features,
            out_features: params.out_features,
            lambda: params.lambda,
            k: params.k,
            leaky_slope: params.leaky_slope,
        }
    }
}

/// Parameter leaves staged on a tape, shared across the snapshot forwards of
/// one pass so gradients accumulate into a single set of leaves.
#[derive(Debug, Clone)]
pub struct StagedModel<T> {
    pub weight: Tensor,
    pub attention: Tensor,
    pub head_weight: Tensor,
    pub head_bias: Tensor,
    pub hyper: ModelHyper<T>,
}

impl<T: Scalar> StagedModel<T> {
    /// Places the learnable parameters on the tape as leaves.
    pub fn stage(
        tape: &mut Tape<T>,
        layer: &TempoKgatParams<T>,
        head: &HeadParams<T>,
        variant: ModelVariant,
    ) -> Result<Self> {
        if head.weight.len() != layer.out_features {
            return Err(ModelError::HeadLength {
                expected: layer.out_features,
                actual: head.weight.len(),
            });
        }
        let weight = tape.leaf(
            layer.weight.clone(),
            &[layer.out_features, layer.in_features],
        )?;
        let attention = tape.leaf(layer.attention.clone(), &[2 * layer.out_features])?;
        let head_weight = tape.leaf(head.weight.clone(), &[1, layer.out_features])?;
        let head_bias = tape.scalar(head.bias)?;
        Ok(Self {
            weight,
            attention,
            head_weight,
            head_bias,
            hyper: ModelHyper::from_params(layer, variant),
        })
    }

    /// Builds a staged model from leaves created by a caller (the
    /// gradient-check harness stages its own leaves).
    pub fn from_parts(
        weight: Tensor,
        attention: Tensor,
        head_weight: Tensor,
        head_bias: Tensor,
        hyper: ModelHyper<T>,
    ) -> Self {
        Self {
            weight,
            attention,
            head_weight,
            head_bias,
            hyper,
        }
    }

    /// Hidden representation for one snapshot: `N x F'`.
    pub fn layer_forward(&self, tape: &mut Tape<T>, snapshot: &GraphSnapshot<T>) -> Result<Tensor> {
        if snapshot.num_features() != self.hyper.in_features {
            return Err(ModelError::FeatureWidth {
                expected: self.hyper.in_features,
                actual: snapshot.num_features(),
            });
        }
        let n = snapshot.num_nodes();
        let x = tape.leaf(
            snapshot.features().to_vec(),
            &[n, self.hyper.in_features],
        )?;
        let x_in = match self.hyper.variant {
            ModelVariant::TempoKgat => {
                let decay = DecayVector::new(self.hyper.in_features, self.hyper.lambda);
                apply_time_decay(tape, &x, &decay)?
            }
            ModelVariant::Gat => x,
        };
        let w_t = tape.transpose(&self.weight)?;
        let transformed = tape.matmul(&x_in, &w_t)?;

        let index = NeighborIndex::build(snapshot);
        let edge_weighted = self.hyper.variant == ModelVariant::TempoKgat;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let selected: &[(usize, T)] = match self.hyper.variant {
                ModelVariant::TempoKgat => index.top_k(i, self.hyper.k)?,
                ModelVariant::Gat => index.neighbors(i),
            };
            if selected.is_empty() {
                rows.push(tape.zeros(&[self.hyper.out_features]));
                continue;
            }
            let selected = selected.to_vec();
            let (alpha, _raw) = attention_coefficients(
                tape,
                i,
                &selected,
                &transformed,
                &self.attention,
                self.hyper.leaky_slope,
            )?;
            rows.push(aggregate_node(
                tape,
                &selected,
                &alpha,
                &transformed,
                edge_weighted,
            )?);
        }
        let flat = tape.concat1d(&rows)?;
        Ok(tape.reshape(&flat, &[n, self.hyper.out_features])?)
    }

    /// Full forecast for one snapshot: `relu` on the hidden rows, a linear
    /// map to one value per node, plus the bias. Returns (predictions `[N]`,
    /// hidden `N x F'`).
    pub fn forward(
        &self,
        tape: &mut Tape<T>,
        snapshot: &GraphSnapshot<T>,
    ) -> Result<(Tensor, Tensor)> {
        let h = self.layer_forward(tape, snapshot)?;
        let activated = tape.relu(&h);
        let head_t = tape.transpose(&self.head_weight)?;
        let scored = tape.matmul(&activated, &head_t)?;
        let flat = tape.reshape(&scored, &[snapshot.num_nodes()])?;
        let predictions = tape.add_scalar(&flat, &self.head_bias)?;
        Ok((predictions, h))
    }
}

/// Output of a single-snapshot forward pass, with the parameter leaves so
/// callers can read gradients after `backward`.
#[derive(Debug)]
pub struct ModelOutput<T> {
    pub predictions: Tensor,
    pub hidden: Tensor,
    pub staged: StagedModel<T>,
}

/// Decay -> top-k -> attention -> edge-weighted aggregation.
pub fn tempokgat_forward<T: Scalar>(
    tape: &mut Tape<T>,
    snapshot: &GraphSnapshot<T>,
    params: &TempoKgatParams<T>,
) -> Result<(Tensor, StagedModel<T>)> {
    let head = HeadParams::new(vec![T::zero(); params.out_features], T::zero());
    let staged = StagedModel::stage(tape, params, &head, ModelVariant::TempoKgat)?;
    let h = staged.layer_forward(tape, snapshot)?;
    Ok((h, staged))
}

/// Same pipeline with no decay, the full in-neighborhood, and no edge-weight
/// factor on the attention coefficients.
pub fn gat_forward<T: Scalar>(
    tape: &mut Tape<T>,
    snapshot: &GraphSnapshot<T>,
    params: &TempoKgatParams<T>,
) -> Result<(Tensor, StagedModel<T>)> {
    let head = HeadParams::new(vec![T::zero(); params.out_features], T::zero());
    let staged = StagedModel::stage(tape, params, &head, ModelVariant::Gat)?;
    let h = staged.layer_forward(tape, snapshot)?;
    Ok((h, staged))
}

/// One-snapshot forecast through the chosen layer variant and the head.
pub fn model_forward<T: Scalar>(
    tape: &mut Tape<T>,
    snapshot: &GraphSnapshot<T>,
    params: &TempoKgatParams<T>,
    head: &HeadParams<T>,
    variant: ModelVariant,
) -> Result<ModelOutput<T>> {
    let staged = StagedModel::stage(tape, params, head, variant)?;
    let (predictions, hidden) = staged.forward(tape, snapshot)?;
    Ok(ModelOutput {
        predictions,
        hidden,
        staged,
    })
}
