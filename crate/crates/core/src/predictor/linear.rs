use serde::{Deserialize, Serialize};

use super::features::{FeatureSpace, FeatureVector, LabeledSample};
use crate::error::{Error, Result};

/// Least-squares affine map over a fixed column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Columns left out because they were constant or linearly dependent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
}

impl LinearFit {
    pub fn constant(value: f64, columns: usize) -> Self {
        LinearFit {
            intercept: value,
            coefficients: vec![0.0; columns],
            dropped: (0..columns).collect(),
        }
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Number of free parameters, intercept included.
    pub fn parameters(&self) -> usize {
        1 + self.coefficients.len() - self.dropped.len()
    }

    /// Ordinary least squares on standardised columns. Constant columns are
    /// dropped up front; a column whose Cholesky pivot collapses is dropped
    /// as dependent on the ones before it.
    #[allow(clippy::needless_range_loop)]
    pub fn fit(rows: &[&[f64]], y: &[f64]) -> Self {
        let n = y.len();
        let p = rows.first().map_or(0, |r| r.len());
        if n == 0 {
            return LinearFit::constant(0.0, p);
        }
        let nf = n as f64;
        let y_mean = y.iter().sum::<f64>() / nf;

        let mut means = vec![0.0; p];
        let mut sds = vec![0.0; p];
        for j in 0..p {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / nf;
            let var = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / nf;
            means[j] = m;
            sds[j] = var.sqrt();
        }
        let active: Vec<usize> = (0..p)
            .filter(|&j| sds[j] > 1e-12 * (1.0 + means[j].abs()))
            .collect();

        let z = |i: usize, j: usize| (rows[i][j] - means[j]) / sds[j];
        let q = active.len();
        let mut gram = vec![vec![0.0; q]; q];
        let mut rhs = vec![0.0; q];
        for i in 0..n {
            let yc = y[i] - y_mean;
            for (a, &ja) in active.iter().enumerate() {
                let za = z(i, ja);
                rhs[a] += za * yc;
                for (b, &jb) in active.iter().enumerate().skip(a) {
                    gram[a][b] += za * z(i, jb);
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                gram[a][b] = gram[b][a];
            }
        }

        // Cholesky with pivot dropping.
        let tol = 1e-9 * nf;
        let mut lower = vec![vec![0.0f64; q]; q];
        let mut kept = vec![false; q];
        for k in 0..q {
            let d = gram[k][k] - (0..k).filter(|&j| kept[j]).map(|j| lower[k][j].powi(2)).sum::<f64>();
            if d <= tol {
                continue;
            }
            kept[k] = true;
            let l_kk = d.sqrt();
            lower[k][k] = l_kk;
            for i in k + 1..q {
                let s = gram[i][k] - (0..k).filter(|&j| kept[j]).map(|j| lower[i][j] * lower[k][j]).sum::<f64>();
                lower[i][k] = s / l_kk;
            }
        }
        let idx: Vec<usize> = (0..q).filter(|&k| kept[k]).collect();
        let mut w = vec![0.0; q];
        for &k in &idx {
            let s = rhs[k] - idx.iter().take_while(|&&j| j < k).map(|&j| lower[k][j] * w[j]).sum::<f64>();
            w[k] = s / lower[k][k];
        }
        let mut gamma = vec![0.0; q];
        for &k in idx.iter().rev() {
            let s = w[k] - idx.iter().filter(|&&j| j > k).map(|&j| lower[j][k] * gamma[j]).sum::<f64>();
            gamma[k] = s / lower[k][k];
        }

        let mut coefficients = vec![0.0; p];
        for (a, &j) in active.iter().enumerate() {
            if kept[a] {
                coefficients[j] = gamma[a] / sds[j];
            }
        }
        let intercept = y_mean - coefficients.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
        let mut dropped: Vec<usize> = (0..p).filter(|j| !active.contains(j)).collect();
        dropped.extend(active.iter().enumerate().filter(|&(a, _)| !kept[a]).map(|(_, &j)| j));
        dropped.sort_unstable();
        LinearFit {
            intercept,
            coefficients,
            dropped,
        }
    }
}

/// Linear regression baseline over the full feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub space: FeatureSpace,
    pub fit: LinearFit,
}

impl LinearModel {
    pub fn predict(&self, features: &FeatureVector) -> f64 {
        self.fit.eval(&self.space.row(features)).max(0.0)
    }
}

pub fn train_linear(dataset: &[LabeledSample]) -> Result<LinearModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let space = FeatureSpace::fit(dataset);
    let rows: Vec<Vec<f64>> = dataset.iter().map(|s| space.row(&s.features)).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let y: Vec<f64> = dataset.iter().map(|s| s.rate).collect();
    let fit = LinearFit::fit(&refs, &y);
    if !fit.dropped.is_empty() && fit.dropped.len() < space.len() {
        log::warn!(
            "linear regression dropped {} dependent or constant column(s): {:?}",
            fit.dropped.len(),
            fit.dropped.iter().map(|&j| space.features[j]).collect::<Vec<_>>()
        );
    }
    Ok(LinearModel { space, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::features::Feature;

    fn sample(snr: f64, rate: f64) -> LabeledSample {
        LabeledSample {
            features: FeatureVector {
                rsrp: -100.0,
                rsrq: -9.0,
                snr,
                cqi: 5.0,
                payload_bytes: 1e6,
                speed: None,
            },
            rate,
        }
    }

    fn snr_coef(model: &LinearModel) -> f64 {
        let j = model.space.features.iter().position(|&f| f == Feature::Snr).unwrap();
        model.fit.coefficients[j]
    }

    #[test]
    fn exact_line() {
        let data: Vec<_> = (0..20).map(|i| sample(i as f64, 2.0 * i as f64)).collect();
        let model = train_linear(&data).unwrap();
        assert!((snr_coef(&model) - 2.0).abs() < 1e-9);
        for s in &data {
            assert!((model.predict(&s.features) - s.rate).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_label() {
        let data: Vec<_> = (0..20).map(|i| sample(i as f64, 5.0)).collect();
        let model = train_linear(&data).unwrap();
        assert!((model.fit.intercept - 5.0).abs() < 1e-9);
        assert!(model.fit.coefficients.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn three_point_hand_ols() {
        let data = vec![sample(0.0, 1.0), sample(1.0, 2.0), sample(2.0, 2.0)];
        let model = train_linear(&data).unwrap();
        assert!((snr_coef(&model) - 0.5).abs() < 1e-12);
        assert!((model.fit.intercept - 7.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_columns_dropped() {
        // rsrp is an exact affine copy of snr
        let data: Vec<_> = (0..30)
            .map(|i| {
                let mut s = sample(i as f64, 3.0 * i as f64 + 1.0);
                s.features.rsrp = -120.0 + 2.0 * i as f64;
                s.features.payload_bytes = 1e6 + ((i * 7) % 5) as f64 * 1e5;
                s
            })
            .collect();
        let model = train_linear(&data).unwrap();
        assert!(model.fit.coefficients.iter().all(|c| c.is_finite()));
        assert!(!model.fit.dropped.is_empty());
        for s in &data {
            assert!((model.predict(&s.features) - s.rate).abs() < 1e-8);
        }
    }

    #[test]
    fn clamps_negative_predictions() {
        let model = LinearModel {
            space: FeatureSpace {
                features: Feature::BASE.to_vec(),
                means: vec![0.0; 5],
            },
            fit: LinearFit {
                intercept: -1.0,
                coefficients: vec![0.0; 5],
                dropped: vec![],
            },
        };
        assert_eq!(model.predict(&sample(10.0, 0.0).features), 0.0);
    }

    #[test]
    fn empty_dataset() {
        assert!(matches!(train_linear(&[]), Err(Error::EmptyDataset)));
    }
}
