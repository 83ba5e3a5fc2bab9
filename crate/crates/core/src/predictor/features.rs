use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::ChannelSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Rsrp,
    Rsrq,
    Snr,
    Cqi,
    PayloadBytes,
    Speed,
}

impl Feature {
    pub const BASE: [Feature; 5] = [
        Feature::Rsrp,
        Feature::Rsrq,
        Feature::Snr,
        Feature::Cqi,
        Feature::PayloadBytes,
    ];
}

/// Context of one transfer decision: passive indicators plus the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub rsrp: f64,
    pub rsrq: f64,
    pub snr: f64,
    pub cqi: f64,
    pub payload_bytes: f64,
    pub speed: Option<f64>,
}

impl FeatureVector {
    pub fn from_sample(sample: &ChannelSample, payload_bytes: f64) -> Self {
        FeatureVector {
            rsrp: sample.rsrp,
            rsrq: sample.rsrq,
            snr: sample.snr,
            cqi: f64::from(sample.cqi),
            payload_bytes,
            speed: Some(sample.speed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.payload_bytes > 0.0) {
            return Err(Error::InvalidArgument("payload_bytes must be positive".into()));
        }
        if self.cqi.fract() != 0.0 || !(0.0..=15.0).contains(&self.cqi) {
            return Err(Error::InvalidArgument(format!("cqi must be an integer in [0, 15], got {}", self.cqi)));
        }
        Ok(())
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::Rsrp => Some(self.rsrp),
            Feature::Rsrq => Some(self.rsrq),
            Feature::Snr => Some(self.snr),
            Feature::Cqi => Some(self.cqi),
            Feature::PayloadBytes => Some(self.payload_bytes),
            Feature::Speed => self.speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    /// Measured goodput, MBit/s.
    pub rate: f64,
}

/// Ordered feature columns a model was trained on, with the training means
/// used in place of absent optional values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub features: Vec<Feature>,
    pub means: Vec<f64>,
}

impl FeatureSpace {
    /// Base features, plus speed when every sample carries it.
    pub fn fit(dataset: &[LabeledSample]) -> Self {
        let mut features = Feature::BASE.to_vec();
        if !dataset.is_empty() && dataset.iter().all(|s| s.features.speed.is_some()) {
            features.push(Feature::Speed);
        }
        let n = dataset.len().max(1) as f64;
        let means = features
            .iter()
            .map(|&f| dataset.iter().filter_map(|s| s.features.get(f)).sum::<f64>() / n)
            .collect();
        FeatureSpace { features, means }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn row(&self, fv: &FeatureVector) -> Vec<f64> {
        self.features
            .iter()
            .zip(&self.means)
            .map(|(&f, &mean)| fv.get(f).unwrap_or(mean))
            .collect()
    }
}
