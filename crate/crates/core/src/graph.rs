//! Graph snapshots, in-neighbor indexing, and top-k neighbor selection.
//!
//! Edges are directed: an edge `(j, i)` makes `j` a message source for `i`,
//! so neighborhoods here are in-neighborhoods of the receiving node.
//! Snapshots and indexes are immutable once built and freely shareable.

use std::collections::HashSet;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({src}, {dst}): node index out of range for {num_nodes} nodes")]
    NodeOutOfRange {
        src: usize,
        dst: usize,
        num_nodes: usize,
    },
    #[error("weights: length {weights} does not match {edges} edges")]
    WeightsLength { weights: usize, edges: usize },
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("weights: non-finite weight on edge ({src}, {dst})")]
    NonFiniteWeight { src: usize, dst: usize },
    #[error("features: expected {expected} values ({num_nodes} nodes x {num_features} features), got {actual}")]
    FeaturesLength {
        expected: usize,
        actual: usize,
        num_nodes: usize,
        num_features: usize,
    },
    #[error("features: non-finite value at flat index {index}")]
    NonFiniteFeature { index: usize },
    #[error("targets: expected {expected} values, got {actual}")]
    TargetsLength { expected: usize, actual: usize },
    #[error("targets: non-finite value at index {index}")]
    NonFiniteTarget { index: usize },
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("top-k selection requires k >= 1")]
    ZeroK,
    #[error("node {node} out of range for {num_nodes} nodes")]
    QueryOutOfRange { node: usize, num_nodes: usize },
}

type Result<V> = std::result::Result<V, GraphError>;

/// One timestep of a temporal graph: weighted directed edges, an `N x F`
/// node-feature matrix (row-major), and a length-`N` target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot<T> {
    num_nodes: usize,
    num_features: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<T>,
    features: Vec<T>,
    targets: Vec<T>,
}

impl<T: Scalar> GraphSnapshot<T> {
    pub fn new(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        weights: Vec<T>,
        num_features: usize,
        features: Vec<T>,
        targets: Vec<T>,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(GraphError::NoNodes);
        }
        if weights.len() != edges.len() {
            return Err(GraphError::WeightsLength {
                weights: weights.len(),
                edges: edges.len(),
            });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (&(src, dst), &w) in edges.iter().zip(&weights) {
            if src >= num_nodes || dst >= num_nodes {
                return Err(GraphError::NodeOutOfRange { src, dst, num_nodes });
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight { src, dst });
            }
            if !seen.insert((src, dst)) {
                return Err(GraphError::DuplicateEdge { src, dst });
            }
        }
        let expected = num_nodes * num_features;
        if features.len() != expected {
            return Err(GraphError::FeaturesLength {
                expected,
                actual: features.len(),
                num_nodes,
                num_features,
            });
        }
        if let Some(index) = features.iter().position(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteFeature { index });
        }
        if targets.len() != num_nodes {
            return Err(GraphError::TargetsLength {
                expected: num_nodes,
                actual: targets.len(),
            });
        }
        if let Some(index) = targets.iter().position(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteTarget { index });
        }
        Ok(Self {
            num_nodes,
            num_features,
            edges,
            weights,
            features,
            targets,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Row-major `N x F` feature matrix.
    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn feature_row(&self, node: usize) -> &[T] {
        &self.features[node * self.num_features..(node + 1) * self.num_features]
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    /// Same topology and weights, every edge weight multiplied by `c`.
    pub fn with_scaled_weights(&self, c: T) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= c;
        }
        out
    }

    /// Same topology, every edge weight replaced by `w`.
    pub fn with_uniform_weights(&self, w: T) -> Self {
        let mut out = self.clone();
        for slot in &mut out.weights {
            *slot = w;
        }
        out
    }
}

/// |E| / N.
pub fn average_in_degree<T: Scalar>(snapshot: &GraphSnapshot<T>) -> f64 {
    snapshot.num_edges() as f64 / snapshot.num_nodes() as f64
}

/// Per-node in-neighbor lists, each sorted by descending weight with ties
/// broken by ascending source index. Top-k selection is a prefix of a list.
#[derive(Debug, Clone)]
pub struct NeighborIndex<T> {
    lists: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> NeighborIndex<T> {
    pub fn build(snapshot: &GraphSnapshot<T>) -> Self {
        let mut lists: Vec<Vec<(usize, T)>> = vec![Vec::new(); snapshot.num_nodes()];
        for (&(src, dst), &w) in snapshot.edges().iter().zip(snapshot.weights()) {
            lists[dst].push((src, w));
        }
        for list in &mut lists {
            // weights are validated finite, so the ordering is total
            list.sort_by(|x, y| {
                y.1.partial_cmp(&x.1)
                    .expect("finite weights")
                    .then(x.0.cmp(&y.0))
            });
        }
        Self { lists }
    }

    pub fn num_nodes(&self) -> usize {
        self.lists.len()
    }

    /// Full in-neighborhood of `node`, sorted by (descending weight,
    /// ascending source).
    pub fn neighbors(&self, node: usize) -> &[(usize, T)] {
        &self.lists[node]
    }

    /// The `min(k, degree)` largest-weight in-neighbors of `node`.
    pub fn top_k(&self, node: usize, k: usize) -> Result<&[(usize, T)]> {
        if k == 0 {
            return Err(GraphError::ZeroK);
        }
        if node >= self.lists.len() {
            return Err(GraphError::QueryOutOfRange {
                node,
                num_nodes: self.lists.len(),
            });
        }
        let list = &self.lists[node];
        Ok(&list[..k.min(list.len())])
    }

    pub fn max_in_degree(&self) -> usize {
        self.lists.iter().map(Vec::len).max().unwrap_or(0)
    }
}
