//! Temporal-graph datasets: the canonical on-disk schema, lag-feature
//! construction from raw series, synthetic data generation, and the
//! chronological train/test split.
//!
//! The canonical file is UTF-8 JSON. Top level:
//!
//! ```json
//! {
//!   "name": "...",
//!   "temporal": "static" | "dynamic",
//!   "num_nodes": N,
//!   "lags": F,
//!   // static topology:
//!   "edges": [[src, dst], ...], "weights": [w, ...],
//!   // or dynamic topology (one entry per snapshot):
//!   "edges_t": [[[src, dst], ...], ...], "weights_t": [[w, ...], ...],
//!   // exactly one of:
//!   "features": [T x N x F], "targets": [T x N],
//!   // or a raw series from which lagged features/targets are derived:
//!   "series": [T_raw x N]
//! }
//! ```
//!
//! Unknown top-level fields are rejected. Feature columns are ordered
//! oldest -> newest; targets are the next observation after the window.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, GraphSnapshot};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("validation error in field \"{field}\": {message}")]
    Validation { field: &'static str, message: String },
    #[error("series: need at least lags + 1 = {required} observations, got {actual}")]
    InsufficientHistory { required: usize, actual: usize },
    #[error("snapshot {index}: {source}")]
    Snapshot { index: usize, source: GraphError },
    #[error("dataset parameter {field} out of range: {message}")]
    Degenerate { field: &'static str, message: String },
    #[error("train_ratio {ratio} must lie strictly between 0 and 1")]
    InvalidRatio { ratio: f64 },
    #[error("split with ratio {ratio} over {total} snapshots leaves the {side} side empty")]
    EmptySplit {
        ratio: f64,
        total: usize,
        side: &'static str,
    },
}

type Result<V> = std::result::Result<V, DatasetError>;

/// Whether topology is shared by all snapshots or varies per timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemporalNature {
    Static,
    Dynamic,
}

impl fmt::Display for TemporalNature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalNature::Static => write!(f, "static"),
            TemporalNature::Dynamic => write!(f, "dynamic"),
        }
    }
}

/// An ordered sequence of graph snapshots with shared node count and lag
/// width. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TemporalGraphDataset<T> {
    pub name: String,
    pub temporal: TemporalNature,
    num_nodes: usize,
    lags: usize,
    snapshots: Vec<GraphSnapshot<T>>,
}

impl<T: Scalar> TemporalGraphDataset<T> {
    pub fn new(
        name: String,
        temporal: TemporalNature,
        num_nodes: usize,
        lags: usize,
        snapshots: Vec<GraphSnapshot<T>>,
    ) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(DatasetError::Validation {
                field: "snapshots",
                message: format!("need at least 2 snapshots, got {}", snapshots.len()),
            });
        }
        for (index, snap) in snapshots.iter().enumerate() {
            if snap.num_nodes() != num_nodes {
                return Err(DatasetError::Validation {
                    field: "num_nodes",
                    message: format!(
                        "snapshot {index} has {} nodes, dataset declares {num_nodes}",
                        snap.num_nodes()
                    ),
                });
            }
            if snap.num_features() != lags {
                return Err(DatasetError::Validation {
                    field: "lags",
                    message: format!(
                        "snapshot {index} has {} features per node, dataset declares {lags}",
                        snap.num_features()
                    ),
                });
            }
        }
        if temporal == TemporalNature::Static {
            let first = &snapshots[0];
            for (index, snap) in snapshots.iter().enumerate().skip(1) {
                if snap.edges() != first.edges() || snap.weights() != first.weights() {
                    return Err(DatasetError::Validation {
                        field: "temporal",
                        message: format!(
                            "declared static but snapshot {index} differs in topology or weights"
                        ),
                    });
                }
            }
        }
        Ok(Self {
            name,
            temporal,
            num_nodes,
            lags,
            snapshots,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[GraphSnapshot<T>] {
        &self.snapshots
    }

    /// Mean over snapshots of |E_t| / N; for static topology this is the
    /// plain |E| / N.
    pub fn average_in_degree(&self) -> f64 {
        let total: f64 = self
            .snapshots
            .iter()
            .map(crate::graph::average_in_degree)
            .sum();
        total / self.snapshots.len() as f64
    }
}

impl<T: PartialEq> PartialEq for TemporalGraphDataset<T> {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.temporal == other.temporal
            && self.num_nodes == other.num_nodes
            && self.lags == other.lags
            && self.snapshots == other.snapshots
    }
}

/// Serde image of the canonical file. Strict: unknown fields are rejected.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile<T> {
    name: String,
    temporal: TemporalNature,
    num_nodes: usize,
    lags: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges_t: Option<Vec<Vec<(usize, usize)>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights_t: Option<Vec<Vec<T>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<Vec<T>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    targets: Option<Vec<Vec<T>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<Vec<Vec<T>>>,
}

/// Builds the `T_raw - lags` sliding-window snapshots of a raw series.
///
/// Snapshot `t` gives node `i` the features
/// `[series[t][i], ..., series[t + lags - 1][i]]` (oldest -> newest) and the
/// target `series[t + lags][i]`. Every snapshot shares `edges`/`weights`.
pub fn build_lagged_snapshots<T: Scalar>(
    series: &[Vec<T>],
    lags: usize,
    edges: &[(usize, usize)],
    weights: &[T],
) -> Result<Vec<GraphSnapshot<T>>> {
    if lags == 0 {
        return Err(DatasetError::Validation {
            field: "lags",
            message: "must be >= 1".to_string(),
        });
    }
    if series.len() <= lags {
        return Err(DatasetError::InsufficientHistory {
            required: lags + 1,
            actual: series.len(),
        });
    }
    let num_nodes = series[0].len();
    for (t, step) in series.iter().enumerate() {
        if step.len() != num_nodes {
            return Err(DatasetError::Validation {
                field: "series",
                message: format!(
                    "row {t} has {} values, expected {num_nodes}",
                    step.len()
                ),
            });
        }
    }

    let count = series.len() - lags;
    let mut snapshots = Vec::with_capacity(count);
    for t in 0..count {
        let mut features = Vec::with_capacity(num_nodes * lags);
        #[allow(clippy::needless_range_loop)]
        for node in 0..num_nodes {
            features.extend((0..lags).map(|lag| series[t + lag][node]));
        }
        let targets = series[t + lags].clone();
        let snap = GraphSnapshot::new(
            num_nodes,
            edges.to_vec(),
            weights.to_vec(),
            lags,
            features,
            targets,
        )
        .map_err(|source| DatasetError::Snapshot { index: t, source })?;
        snapshots.push(snap);
    }
    Ok(snapshots)
}

fn dataset_from_file<T: Scalar>(file: DatasetFile<T>, path: &Path) -> Result<TemporalGraphDataset<T>> {
    let DatasetFile {
        name,
        temporal,
        num_nodes,
        lags,
        edges,
        weights,
        edges_t,
        weights_t,
        features,
        targets,
        series,
    } = file;
    let _ = path;

    if num_nodes == 0 {
        return Err(DatasetError::Validation {
            field: "num_nodes",
            message: "must be >= 1".to_string(),
        });
    }
    if lags == 0 {
        return Err(DatasetError::Validation {
            field: "lags",
            message: "must be >= 1".to_string(),
        });
    }

    // topology fields must match the declared temporal nature
    match temporal {
        TemporalNature::Static => {
            if edges.is_none() {
                return Err(DatasetError::Validation {
                    field: "edges",
                    message: "static datasets require \"edges\"".to_string(),
                });
            }
            if weights.is_none() {
                return Err(DatasetError::Validation {
                    field: "weights",
                    message: "static datasets require \"weights\"".to_string(),
                });
            }
            if edges_t.is_some() || weights_t.is_some() {
                return Err(DatasetError::Validation {
                    field: "edges_t",
                    message: "static datasets must not carry per-snapshot topology".to_string(),
                });
            }
        }
        TemporalNature::Dynamic => {
            if edges_t.is_none() {
                return Err(DatasetError::Validation {
                    field: "edges_t",
                    message: "dynamic datasets require \"edges_t\"".to_string(),
                });
            }
            if weights_t.is_none() {
                return Err(DatasetError::Validation {
                    field: "weights_t",
                    message: "dynamic datasets require \"weights_t\"".to_string(),
                });
            }
            if edges.is_some() || weights.is_some() {
                return Err(DatasetError::Validation {
                    field: "edges",
                    message: "dynamic datasets must not carry static topology".to_string(),
                });
            }
        }
    }

    if let Some(w) = &weights {
        let e = edges.as_ref().expect("checked above");
        if w.len() != e.len() {
            return Err(DatasetError::Validation {
                field: "weights",
                message: format!("length {} does not match {} edges", w.len(), e.len()),
            });
        }
    }
    if let (Some(et), Some(wt)) = (&edges_t, &weights_t) {
        if et.len() != wt.len() {
            return Err(DatasetError::Validation {
                field: "weights_t",
                message: format!("length {} does not match edges_t length {}", wt.len(), et.len()),
            });
        }
        for (t, (e, w)) in et.iter().zip(wt).enumerate() {
            if e.len() != w.len() {
                return Err(DatasetError::Validation {
                    field: "weights_t",
                    message: format!(
                        "entry {t} has {} weights for {} edges",
                        w.len(),
                        e.len()
                    ),
                });
            }
        }
    }

    let snapshots = match (features, targets, series) {
        (Some(features), Some(targets), None) => {
            if features.len() != targets.len() {
                return Err(DatasetError::Validation {
                    field: "targets",
                    message: format!(
                        "{} target rows for {} feature snapshots",
                        targets.len(),
                        features.len()
                    ),
                });
            }
            let count = features.len();
            if let Some(et) = &edges_t {
                if et.len() != count {
                    return Err(DatasetError::Validation {
                        field: "edges_t",
                        message: format!("{} entries for {count} snapshots", et.len()),
                    });
                }
            }
            let mut snapshots = Vec::with_capacity(count);
            for (t, (feat, tgt)) in features.into_iter().zip(targets).enumerate() {
                if feat.len() != num_nodes {
                    return Err(DatasetError::Validation {
                        field: "features",
                        message: format!(
                            "snapshot {t} has {} node rows, expected {num_nodes}",
                            feat.len()
                        ),
                    });
                }
                let mut flat = Vec::with_capacity(num_nodes * lags);
                for (node, row) in feat.into_iter().enumerate() {
                    if row.len() != lags {
                        return Err(DatasetError::Validation {
                            field: "features",
                            message: format!(
                                "snapshot {t} node {node} has {} lags, expected {lags}",
                                row.len()
                            ),
                        });
                    }
                    flat.extend(row);
                }
                let (e, w) = match temporal {
                    TemporalNature::Static => (
                        edges.clone().expect("checked above"),
                        weights.clone().expect("checked above"),
                    ),
                    TemporalNature::Dynamic => (
                        edges_t.as_ref().expect("checked above")[t].clone(),
                        weights_t.as_ref().expect("checked above")[t].clone(),
                    ),
                };
                let snap = GraphSnapshot::new(num_nodes, e, w, lags, flat, tgt)
                    .map_err(|source| DatasetError::Snapshot { index: t, source })?;
                snapshots.push(snap);
            }
            snapshots
        }
        (None, None, Some(series)) => match temporal {
            TemporalNature::Static => build_lagged_snapshots(
                &series,
                lags,
                edges.as_ref().expect("checked above"),
                weights.as_ref().expect("checked above"),
            )?,
            TemporalNature::Dynamic => {
                // build with placeholder topology first (this also validates
                // the series), then attach each snapshot's own edge list
                let base = build_lagged_snapshots(&series, lags, &[], &[])?;
                let et = edges_t.as_ref().expect("checked above");
                let wt = weights_t.as_ref().expect("checked above");
                if et.len() != base.len() {
                    return Err(DatasetError::Validation {
                        field: "edges_t",
                        message: format!(
                            "{} entries for {} derived snapshots",
                            et.len(),
                            base.len()
                        ),
                    });
                }
                let mut snapshots = Vec::with_capacity(base.len());
                for (t, snap) in base.into_iter().enumerate() {
                    let rebuilt = GraphSnapshot::new(
                        num_nodes,
                        et[t].clone(),
                        wt[t].clone(),
                        lags,
                        snap.features().to_vec(),
                        snap.targets().to_vec(),
                    )
                    .map_err(|source| DatasetError::Snapshot { index: t, source })?;
                    snapshots.push(rebuilt);
                }
                snapshots
            }
        },
        (None, None, None) => {
            return Err(DatasetError::Validation {
                field: "features",
                message: "provide either \"features\"+\"targets\" or \"series\"".to_string(),
            });
        }
        _ => {
            return Err(DatasetError::Validation {
                field: "series",
                message: "\"series\" is mutually exclusive with \"features\"/\"targets\""
                    .to_string(),
            });
        }
    };

    TemporalGraphDataset::new(name, temporal, num_nodes, lags, snapshots)
}

/// Loads and validates a canonical dataset file.
pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<TemporalGraphDataset<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_dataset_from_str(&text, path)
}

/// Parses a canonical dataset from JSON text; `path` is used for messages.
pub fn load_dataset_from_str<T: Scalar>(
    text: &str,
    path: impl AsRef<Path>,
) -> Result<TemporalGraphDataset<T>> {
    let path = path.as_ref();
    let file: DatasetFile<T> = serde_json::from_str(text).map_err(|source| DatasetError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    dataset_from_file(file, path)
}

/// Serializes a dataset in the canonical schema (explicit features+targets).
pub fn dataset_to_string<T: Scalar>(dataset: &TemporalGraphDataset<T>) -> String {
    let first = &dataset.snapshots()[0];
    let (edges, weights, edges_t, weights_t) = match dataset.temporal {
        TemporalNature::Static => (
            Some(first.edges().to_vec()),
            Some(first.weights().to_vec()),
            None,
            None,
        ),
        TemporalNature::Dynamic => (
            None,
            None,
            Some(
                dataset
                    .snapshots()
                    .iter()
                    .map(|s| s.edges().to_vec())
                    .collect(),
            ),
            Some(
                dataset
                    .snapshots()
                    .iter()
                    .map(|s| s.weights().to_vec())
                    .collect(),
            ),
        ),
    };
    let features = dataset
        .snapshots()
        .iter()
        .map(|s| {
            (0..s.num_nodes())
                .map(|i| s.feature_row(i).to_vec())
                .collect()
        })
        .collect();
    let targets = dataset
        .snapshots()
        .iter()
        .map(|s| s.targets().to_vec())
        .collect();
    let file = DatasetFile {
        name: dataset.name.clone(),
        temporal: dataset.temporal,
        num_nodes: dataset.num_nodes(),
        lags: dataset.lags(),
        edges,
        weights,
        edges_t,
        weights_t,
        features: Some(features),
        targets: Some(targets),
        series: None,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("dataset serialization");
    text.push('\n');
    text
}

/// Writes the canonical file for a dataset.
pub fn save_dataset<T: Scalar>(
    dataset: &TemporalGraphDataset<T>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dataset_to_string(dataset)).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub num_nodes: usize,
    /// Number of snapshots after lag construction; the underlying series has
    /// `num_snapshots + lags` raw steps.
    pub num_snapshots: usize,
    pub lags: usize,
    pub seed: u64,
    /// Fraction of the N(N-1) possible directed non-self edges, in (0, 1].
    /// The realized edge count is round(density * N * (N-1)), exactly.
    pub edge_density: f64,
}

/// Deterministically generates a weighted directed graph plus per-node
/// autoregressive series with neighbor coupling, so the graph structure
/// genuinely informs one-step prediction. Same seed, same dataset,
/// bit for bit.
pub fn generate_synthetic<T: Scalar>(config: &SyntheticConfig) -> Result<TemporalGraphDataset<T>> {
    let SyntheticConfig {
        num_nodes,
        num_snapshots,
        lags,
        seed,
        edge_density,
    } = *config;
    if num_nodes < 2 {
        return Err(DatasetError::Degenerate {
            field: "num_nodes",
            message: format!("must be >= 2, got {num_nodes}"),
        });
    }
    if num_snapshots < 2 {
        return Err(DatasetError::Degenerate {
            field: "num_snapshots",
            message: format!("must be >= 2, got {num_snapshots}"),
        });
    }
    if lags == 0 {
        return Err(DatasetError::Degenerate {
            field: "lags",
            message: "must be >= 1".to_string(),
        });
    }
    if !(edge_density > 0.0 && edge_density <= 1.0) {
        return Err(DatasetError::Degenerate {
            field: "edge_density",
            message: format!("must lie in (0, 1], got {edge_density}"),
        });
    }

    let mut rng = SplitMix64::new(seed);

    // exact edge count via partial Fisher-Yates over all ordered non-self pairs
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(num_nodes * (num_nodes - 1));
    for s in 0..num_nodes {
        for d in 0..num_nodes {
            if s != d {
                pairs.push((s, d));
            }
        }
    }
    let edge_count = (edge_density * pairs.len() as f64).round() as usize;
    let edge_count = edge_count.min(pairs.len());
    for i in 0..edge_count {
        let j = i + rng.below(pairs.len() - i);
        pairs.swap(i, j);
    }
    let mut edges: Vec<(usize, usize)> = pairs[..edge_count].to_vec();
    edges.sort_unstable();
    let weights_f64: Vec<f64> = edges.iter().map(|_| rng.uniform(0.6, 1.0)).collect();

    // Each node follows its own seasonal signal and is coupled to its two
    // strongest in-edges; the remaining edges are structural noise. Weight
    // rank therefore encodes which connections genuinely matter for
    // prediction, and distinct periods/phases keep node signals decorrelated.
    let self_coef: Vec<f64> = (0..num_nodes).map(|_| rng.uniform(0.05, 0.2)).collect();
    let amplitude: Vec<f64> = (0..num_nodes).map(|_| rng.uniform(0.2, 0.5)).collect();
    let period: Vec<f64> = (0..num_nodes).map(|_| 5.0 + rng.below(8) as f64).collect();
    let phase: Vec<f64> = (0..num_nodes).map(|_| rng.next_f64()).collect();
    let coupling = 0.7;
    let noise = 0.02;
    let drivers_per_node = 2;
    let mut in_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_nodes];
    for (&(src, dst), &w) in edges.iter().zip(&weights_f64) {
        in_edges[dst].push((src, w));
    }
    let drivers: Vec<Vec<(usize, f64)>> = in_edges
        .iter()
        .map(|list| {
            let mut sorted = list.clone();
            sorted.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            sorted.truncate(drivers_per_node);
            sorted
        })
        .collect();
    let driver_total: Vec<f64> = drivers
        .iter()
        .map(|list| list.iter().map(|&(_, w)| w).sum::<f64>())
        .collect();
    let season = |i: usize, t: usize| -> f64 {
        amplitude[i] * (std::f64::consts::TAU * (t as f64 / period[i] + phase[i])).sin()
    };

    let raw_len = num_snapshots + lags;
    let mut series_f64: Vec<Vec<f64>> = Vec::with_capacity(raw_len);
    series_f64.push((0..num_nodes).map(|i| season(i, 0)).collect());
    for t in 1..raw_len {
        let prev = series_f64[t - 1].clone();
        let mut step = Vec::with_capacity(num_nodes);
        for i in 0..num_nodes {
            let mut value = self_coef[i] * prev[i] + season(i, t);
            if driver_total[i] > 0.0 {
                let drive: f64 = drivers[i].iter().map(|&(j, w)| w * prev[j]).sum();
                value += coupling * drive / driver_total[i];
            }
            value += noise * rng.uniform(-1.0, 1.0);
            step.push(value);
        }
        series_f64.push(step);
    }

    let series: Vec<Vec<T>> = series_f64
        .into_iter()
        .map(|row| row.into_iter().map(T::from_f64).collect())
        .collect();
    let weights: Vec<T> = weights_f64.into_iter().map(T::from_f64).collect();
    let snapshots = build_lagged_snapshots(&series, lags, &edges, &weights)?;

    TemporalGraphDataset::new(
        format!("synthetic-n{num_nodes}-t{num_snapshots}-l{lags}-seed{seed}"),
        TemporalNature::Static,
        num_nodes,
        lags,
        snapshots,
    )
}

/// One seeded random snapshot (features and targets uniform in [-1, 1)),
/// for gradient checks and property tests.
pub fn random_snapshot<T: Scalar>(
    num_nodes: usize,
    num_features: usize,
    edge_density: f64,
    seed: u64,
) -> Result<GraphSnapshot<T>> {
    if num_nodes == 0 {
        return Err(DatasetError::Degenerate {
            field: "num_nodes",
            message: "must be >= 1".to_string(),
        });
    }
    if !(edge_density > 0.0 && edge_density <= 1.0) {
        return Err(DatasetError::Degenerate {
            field: "edge_density",
            message: format!("must lie in (0, 1], got {edge_density}"),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for s in 0..num_nodes {
        for d in 0..num_nodes {
            if s != d && rng.next_f64() < edge_density {
                edges.push((s, d));
                weights.push(T::from_f64(rng.uniform(0.2, 1.0)));
            }
        }
    }
    let features = (0..num_nodes * num_features)
        .map(|_| T::from_f64(rng.uniform(-1.0, 1.0)))
        .collect();
    let targets = (0..num_nodes)
        .map(|_| T::from_f64(rng.uniform(-1.0, 1.0)))
        .collect();
    GraphSnapshot::new(num_nodes, edges, weights, num_features, features, targets)
        .map_err(|source| DatasetError::Snapshot { index: 0, source })
}

/// Chronological split: the first `floor(ratio * T)` snapshots train, the
/// rest test. Order is preserved and every train index precedes every test
/// index.
#[allow(clippy::type_complexity)]
pub fn temporal_split<T: Scalar>(
    dataset: &TemporalGraphDataset<T>,
    train_ratio: f64,
) -> Result<(&[GraphSnapshot<T>], &[GraphSnapshot<T>])> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(DatasetError::InvalidRatio { ratio: train_ratio });
    }
    let total = dataset.len();
    let train_len = (train_ratio * total as f64).floor() as usize;
    if train_len == 0 {
        return Err(DatasetError::EmptySplit {
            ratio: train_ratio,
            total,
            side: "train",
        });
    }
    if train_len >= total {
        return Err(DatasetError::EmptySplit {
            ratio: train_ratio,
            total,
            side: "test",
        });
    }
    let (train, test) = dataset.snapshots().split_at(train_len);
    Ok((train, test))
}
