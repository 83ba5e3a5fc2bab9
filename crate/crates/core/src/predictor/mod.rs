//! Data-rate regression from passive indicators and payload size.

mod dataset;
mod eval;
mod features;
mod linear;
mod tree;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dataset::{dataset_from_records, parse_dataset_csv, read_dataset_file};
pub use eval::{cross_validate, cross_validate_predictions, eval_metrics, fold_assignment, EvalMetrics};
pub use features::{Feature, FeatureSpace, FeatureVector, LabeledSample};
pub use linear::{train_linear, LinearFit, LinearModel};
pub use tree::{train_model_tree, ModelTree, Node, TreeParams};

use crate::error::{Error, Result};

/// Anything that turns a decision context into a predicted rate in MBit/s.
pub trait RateModel {
    /// Predicted rate, never negative.
    fn predict(&self, features: &FeatureVector) -> f64;
}

impl RateModel for ModelTree {
    fn predict(&self, features: &FeatureVector) -> f64 {
        ModelTree::predict(self, features)
    }
}

impl RateModel for LinearModel {
    fn predict(&self, features: &FeatureVector) -> f64 {
        LinearModel::predict(self, features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    ModelTree(ModelTree),
    Linear(LinearModel),
}

impl RateModel for Predictor {
    fn predict(&self, features: &FeatureVector) -> f64 {
        match self {
            Predictor::ModelTree(m) => m.predict(features),
            Predictor::Linear(m) => m.predict(features),
        }
    }
}

pub fn predict(model: &impl RateModel, features: &FeatureVector) -> f64 {
    model.predict(features)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    ModelTree(TreeParams),
    Linear,
}

impl Learner {
    pub fn model_tree() -> Self {
        Learner::ModelTree(TreeParams::default())
    }

    pub fn train(&self, dataset: &[LabeledSample]) -> Result<Predictor> {
        match self {
            Learner::ModelTree(params) => train_model_tree(dataset, *params).map(Predictor::ModelTree),
            Learner::Linear => train_linear(dataset).map(Predictor::Linear),
        }
    }
}

impl std::str::FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model_tree" | "m5" | "m5t" => Ok(Learner::model_tree()),
            "linear" | "lr" => Ok(Learner::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown learner `{other}` (expected model_tree or linear)"
            ))),
        }
    }
}

const MODEL_FORMAT: &str = "cat-sched-rate-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Predictor,
}

/// Writes `model` as pretty-printed JSON: nested split/leaf records with
/// decimal coefficients.
pub fn write_model<W: Write>(model: &Predictor, out: W) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer_pretty(out, &file)?;
    Ok(())
}

pub fn read_model<R: Read>(input: R) -> Result<Predictor> {
    let file: ModelFile = serde_json::from_reader(input)?;
    if file.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!("unexpected format tag `{}`", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {}", file.version)));
    }
    Ok(file.model)
}

pub fn save_model(model: &Predictor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut out = std::io::BufWriter::new(file);
    write_model(model, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Predictor> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_model(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<LabeledSample> {
        (0..60)
            .map(|i| {
                let snr = (i % 30) as f64;
                LabeledSample {
                    features: FeatureVector {
                        rsrp: -120.0 + (i % 7) as f64,
                        rsrq: -11.0 + (i % 5) as f64,
                        snr,
                        cqi: (i % 16) as f64,
                        payload_bytes: 1e6 + (i % 3) as f64 * 5e5,
                        speed: Some(10.0 + (i % 4) as f64),
                    },
                    rate: if snr < 15.0 { 2.0 } else { 0.5 * snr },
                }
            })
            .collect()
    }

    #[test]
    fn model_file_round_trip() {
        let data = samples();
        for learner in [Learner::model_tree(), Learner::Linear] {
            let model = learner.train(&data).unwrap();
            let mut buf = Vec::new();
            write_model(&model, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.contains("\"format\": \"cat-sched-rate-model\""));
            let back = read_model(buf.as_slice()).unwrap();
            assert_eq!(back, model);
            for s in &data {
                assert_eq!(back.predict(&s.features), model.predict(&s.features));
            }
        }
    }

    #[test]
    fn rejects_foreign_model_files() {
        let bad = r#"{"format":"other","version":1,"model":{"kind":"linear"}}"#;
        assert!(read_model(bad.as_bytes()).is_err());
    }

    #[test]
    fn single_leaf_constant_tree() {
        let mut data = samples();
        for s in &mut data {
            s.rate = 5.0;
        }
        let model = Learner::model_tree().train(&data).unwrap();
        let probe = FeatureVector {
            speed: None,
            ..data[3].features
        };
        assert!((predict(&model, &probe) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn learner_names() {
        assert_eq!("linear".parse::<Learner>().unwrap(), Learner::Linear);
        assert_eq!("model_tree".parse::<Learner>().unwrap(), Learner::model_tree());
        assert!("svm".parse::<Learner>().is_err());
    }
}
