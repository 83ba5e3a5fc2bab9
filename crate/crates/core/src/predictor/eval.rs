use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::LabeledSample;
use super::{Learner, RateModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Pearson correlation; `None` when either series has zero variance.
    pub correlation: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
}

impl std::fmt::Display for EvalMetrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.correlation {
            Some(r) => write!(f, "correlation={r:.4}")?,
            None => write!(f, "correlation=undefined")?,
        }
        write!(f, " mae={:.4} rmse={:.4}", self.mae, self.rmse)
    }
}

pub fn eval_metrics(predictions: &[f64], actuals: &[f64]) -> Result<EvalMetrics> {
    if predictions.len() != actuals.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} actual values",
            predictions.len(),
            actuals.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = predictions.len() as f64;
    let (abs, sq) = predictions
        .iter()
        .zip(actuals)
        .fold((0.0, 0.0), |(a, s), (p, y)| (a + (p - y).abs(), s + (p - y) * (p - y)));
    let mae = abs / n;
    // Guard the power-mean ordering against the last rounding step.
    let rmse = (sq / n).sqrt().max(mae);

    let mp = predictions.iter().sum::<f64>() / n;
    let ma = actuals.iter().sum::<f64>() / n;
    let (mut cov, mut vp, mut va) = (0.0, 0.0, 0.0);
    for (p, y) in predictions.iter().zip(actuals) {
        cov += (p - mp) * (y - ma);
        vp += (p - mp) * (p - mp);
        va += (y - ma) * (y - ma);
    }
    let correlation = (vp > 0.0 && va > 0.0).then(|| (cov / (vp.sqrt() * va.sqrt())).clamp(-1.0, 1.0));
    Ok(EvalMetrics { correlation, mae, rmse })
}

/// Fold index of every sample after a seeded shuffle. Fold sizes differ by
/// at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// Held-out prediction for every sample, in dataset order.
pub fn cross_validate_predictions(dataset: &[LabeledSample], k: usize, learner: &Learner, seed: u64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("cross validation needs k >= 2, got {k}")));
    }
    if dataset.len() < k {
        return Err(Error::InvalidArgument(format!(
            "dataset of {} samples is too small for {k}-fold cross validation",
            dataset.len()
        )));
    }
    let folds = fold_assignment(dataset.len(), k, seed);
    let mut predictions = vec![f64::NAN; dataset.len()];
    for fold in 0..k {
        let train: Vec<LabeledSample> = dataset
            .iter()
            .zip(&folds)
            .filter(|&(_, &f)| f != fold)
            .map(|(s, _)| *s)
            .collect();
        let model = learner.train(&train)?;
        for (i, s) in dataset.iter().enumerate() {
            if folds[i] == fold {
                predictions[i] = model.predict(&s.features);
            }
        }
    }
    Ok(predictions)
}

pub fn cross_validate(dataset: &[LabeledSample], k: usize, learner: &Learner, seed: u64) -> Result<EvalMetrics> {
    let predictions = cross_validate_predictions(dataset, k, learner, seed)?;
    let actuals: Vec<f64> = dataset.iter().map(|s| s.rate).collect();
    eval_metrics(&predictions, &actuals)
}
