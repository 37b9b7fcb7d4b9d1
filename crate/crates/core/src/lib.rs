//! Temporal graph attention forecasting.
//!
//! The pipeline: lag features decayed by recency, top-k in-neighbor selection
//! by edge weight, softmax attention scaled by edge weights for aggregation,
//! a ReLU + linear forecasting head, and an MSE training loop on a
//! reverse-mode autodiff tape, with a plain-GAT baseline sharing the same
//! harness. Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the
//! `*64` aliases below are the concrete types the CLI and tests use.

pub mod autodiff;
pub mod dataset;
pub mod graph;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod training;

pub use scalar::Scalar;

pub type Tape64 = autodiff::Tape<f64>;
pub type Snapshot64 = graph::GraphSnapshot<f64>;
pub type NeighborIndex64 = graph::NeighborIndex<f64>;
pub type Dataset64 = dataset::TemporalGraphDataset<f64>;
pub type LayerParams64 = model::TempoKgatParams<f64>;
pub type HeadParams64 = model::HeadParams<f64>;
pub type StagedModel64 = model::StagedModel<f64>;
pub type Metrics64 = training::Metrics<f64>;
pub type TrainedModel64 = training::TrainedModel<f64>;
pub type AdamState64 = training::AdamState<f64>;
