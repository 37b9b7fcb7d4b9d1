//! On-disk report and model formats.
//!
//! Run reports are JSON with top-level keys `config`, `metrics`, `epochs`,
//! `wall_seconds`, `version`. Model files carry the learned parameters plus
//! the config echo needed to rebuild the exact layer.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tempokgat::model::{HeadParams, TempoKgatParams};
use tempokgat::training::{EpochRecord, Metrics, TrainConfig, TrainedModel};

pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Config echo: every TrainConfig field plus the dataset the run read.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub dataset: String,
    #[serde(flatten)]
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReportMetrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
}

impl From<Metrics<f64>> for ReportMetrics {
    fn from(m: Metrics<f64>) -> Self {
        Self {
            mae: m.mae,
            mse: m.mse,
            rmse: m.rmse,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochEntry {
    pub epoch: usize,
    pub train_loss: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub metrics: ReportMetrics,
    pub epochs: Vec<EpochEntry>,
    pub wall_seconds: f64,
    pub version: String,
}

impl RunReport {
    pub fn new(
        config: ConfigEcho,
        metrics: Metrics<f64>,
        records: &[EpochRecord<f64>],
        wall_seconds: f64,
    ) -> Self {
        Self {
            config,
            metrics: metrics.into(),
            epochs: records
                .iter()
                .map(|r| EpochEntry {
                    epoch: r.epoch,
                    train_loss: r.train_loss,
                })
                .collect(),
            wall_seconds,
            version: FORMAT_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelParamsFile {
    pub weight: Vec<f64>,
    pub attention: Vec<f64>,
    pub head_weight: Vec<f64>,
    pub head_bias: f64,
}

/// Serialized model: load(save(p)) reproduces the parameters bit-exactly
/// (serde_json's float_roundtrip feature guarantees the reload side).
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: String,
    pub config: ConfigEcho,
    pub in_features: usize,
    pub params: ModelParamsFile,
}

impl ModelFile {
    pub fn from_model(model: &TrainedModel<f64>, config: ConfigEcho) -> Self {
        Self {
            version: FORMAT_VERSION.to_string(),
            in_features: model.layer.in_features,
            params: ModelParamsFile {
                weight: model.layer.weight.clone(),
                attention: model.layer.attention.clone(),
                head_weight: model.head.weight.clone(),
                head_bias: model.head.bias,
            },
            config,
        }
    }

    pub fn into_model(self) -> Result<(TrainedModel<f64>, ConfigEcho), String> {
        let ModelFile {
            config,
            in_features,
            params,
            ..
        } = self;
        let layer = TempoKgatParams::new(
            params.weight,
            params.attention,
            in_features,
            config.train.hidden,
            config.train.lambda,
            config.train.k,
            config.train.leaky_slope,
        )
        .map_err(|e| format!("model file is inconsistent: {e}"))?;
        if params.head_weight.len() != config.train.hidden {
            return Err(format!(
                "model file is inconsistent: head weight holds {} values, expected {}",
                params.head_weight.len(),
                config.train.hidden
            ));
        }
        let model = TrainedModel {
            layer,
            head: HeadParams::new(params.head_weight, params.head_bias),
        };
        Ok((model, config))
    }
}

pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    match path {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
