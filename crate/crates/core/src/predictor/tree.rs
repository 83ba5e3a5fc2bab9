//! M5-style model tree: binary splits chosen by standard-deviation
//! reduction, linear models in the leaves, and bottom-up pruning that
//! collapses a subtree whenever a single linear model is estimated to do at
//! least as well.

use serde::{Deserialize, Serialize};

use super::features::{Feature, FeatureSpace, FeatureVector, LabeledSample};
use super::linear::LinearFit;
use crate::error::{Error, Result};

/// Nodes whose label deviation falls below this share of the root's stop
/// splitting.
const SD_STOP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Minimum number of training samples per leaf. `None` uses twice the
    /// feature count.
    pub min_leaf_size: Option<usize>,
    /// Penalty multiplier on the parameter count in the pruning error
    /// estimate.
    pub pruning_factor: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf_size: None,
            pruning_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: Feature,
        /// Samples with `value <= threshold` go left.
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        samples: usize,
        model: LinearFit,
        /// Smallest and largest training label; leaf output is clamped to it.
        label_range: [f64; 2],
    },
}

fn leaf_output(model: &LinearFit, label_range: [f64; 2], row: &[f64]) -> f64 {
    model.eval(row).clamp(label_range[0], label_range[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTree {
    pub space: FeatureSpace,
    pub min_leaf_size: usize,
    pub pruning_factor: f64,
    pub root: Node,
}

impl ModelTree {
    pub fn predict(&self, features: &FeatureVector) -> f64 {
        let row = self.space.row(features);
        let (_, model, range) = self.leaf_for(&row);
        leaf_output(model, range, &row).max(0.0)
    }

    /// Pre-order index of the leaf `features` is routed to.
    pub fn leaf_index(&self, features: &FeatureVector) -> usize {
        self.leaf_for(&self.space.row(features)).0
    }

    fn leaf_for(&self, row: &[f64]) -> (usize, &LinearFit, [f64; 2]) {
        let mut node = &self.root;
        let mut index = 0;
        loop {
            match node {
                Node::Leaf { model, label_range, .. } => return (index, model, *label_range),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let col = self.column(*feature);
                    if row[col] <= *threshold {
                        node = left;
                    } else {
                        index += count_leaves(left);
                        node = right;
                    }
                }
            }
        }
    }

    fn column(&self, feature: Feature) -> usize {
        self.space
            .features
            .iter()
            .position(|&f| f == feature)
            .expect("split feature missing from feature space")
    }

    pub fn leaf_count(&self) -> usize {
        count_leaves(&self.root)
    }

    /// Training sample counts of the leaves in pre-order.
    pub fn leaf_sizes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        collect_sizes(&self.root, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        depth(&self.root)
    }

    pub fn root_split(&self) -> Option<(Feature, f64)> {
        match &self.root {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }
}

fn count_leaves(node: &Node) -> usize {
    match node {
        Node::Leaf { .. } => 1,
        Node::Split { left, right, .. } => count_leaves(left) + count_leaves(right),
    }
}

fn collect_sizes(node: &Node, out: &mut Vec<usize>) {
    match node {
        Node::Leaf { samples, .. } => out.push(*samples),
        Node::Split { left, right, .. } => {
            collect_sizes(left, out);
            collect_sizes(right, out);
        }
    }
}

fn depth(node: &Node) -> usize {
    match node {
        Node::Leaf { .. } => 0,
        Node::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
    }
}

pub fn train_model_tree(dataset: &[LabeledSample], params: TreeParams) -> Result<ModelTree> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let space = FeatureSpace::fit(dataset);
    let min_leaf_size = params.min_leaf_size.unwrap_or(2 * space.len());
    if min_leaf_size < 2 * space.len() {
        return Err(Error::InvalidArgument(format!(
            "min_leaf_size must be at least twice the feature count ({}), got {min_leaf_size}",
            2 * space.len()
        )));
    }
    if !(params.pruning_factor.is_finite() && params.pruning_factor >= 0.0) {
        return Err(Error::InvalidArgument("pruning_factor must be finite and >= 0".into()));
    }
    let rows: Vec<Vec<f64>> = dataset.iter().map(|s| space.row(&s.features)).collect();
    let y: Vec<f64> = dataset.iter().map(|s| s.rate).collect();
    let builder = Builder {
        rows: &rows,
        y: &y,
        features: &space.features,
        min_leaf_size,
        pruning_factor: params.pruning_factor,
        stop_sd: SD_STOP_FRACTION * population_sd(y.iter().copied()),
    };
    let indices: Vec<usize> = (0..dataset.len()).collect();
    let (root, _) = builder.grow(indices);
    Ok(ModelTree {
        space,
        min_leaf_size,
        pruning_factor: params.pruning_factor,
        root,
    })
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    features: &'a [Feature],
    min_leaf_size: usize,
    pruning_factor: f64,
    stop_sd: f64,
}

struct Split {
    column: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Builder<'_> {
    /// Grows and prunes the subtree for `indices`, returning it with its
    /// estimated error.
    fn grow(&self, indices: Vec<usize>) -> (Node, f64) {
        let (leaf, leaf_err) = self.leaf(&indices);
        let sd = population_sd(indices.iter().map(|&i| self.y[i]));
        if indices.len() < 2 * self.min_leaf_size || sd <= self.stop_sd {
            return (leaf, leaf_err);
        }
        let Some(split) = self.best_split(&indices, sd) else {
            return (leaf, leaf_err);
        };
        let n = indices.len() as f64;
        let (nl, nr) = (split.left.len() as f64, split.right.len() as f64);
        let (left, left_err) = self.grow(split.left);
        let (right, right_err) = self.grow(split.right);
        let subtree_err = (nl * left_err + nr * right_err) / n;
        if leaf_err <= subtree_err {
            (leaf, leaf_err)
        } else {
            let node = Node::Split {
                feature: self.features[split.column],
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            };
            (node, subtree_err)
        }
    }

    fn leaf(&self, indices: &[usize]) -> (Node, f64) {
        let rows: Vec<&[f64]> = indices.iter().map(|&i| self.rows[i].as_slice()).collect();
        let y: Vec<f64> = indices.iter().map(|&i| self.y[i]).collect();
        let model = LinearFit::fit(&rows, &y);
        let label_range = y.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], &v| [lo.min(v), hi.max(v)]);
        let err = self.estimated_error(&model, label_range, &rows, &y);
        (
            Node::Leaf {
                samples: indices.len(),
                model,
                label_range,
            },
            err,
        )
    }

    /// Mean absolute residual inflated by `(n + pf·v) / (n − v)` for `v`
    /// free parameters.
    fn estimated_error(&self, model: &LinearFit, label_range: [f64; 2], rows: &[&[f64]], y: &[f64]) -> f64 {
        let n = y.len() as f64;
        let mae = rows
            .iter()
            .zip(y)
            .map(|(r, t)| (leaf_output(model, label_range, r) - t).abs())
            .sum::<f64>()
            / n;
        let v = model.parameters() as f64;
        if n > v {
            mae * (n + self.pruning_factor * v) / (n - v)
        } else {
            mae * 10.0
        }
    }

    fn best_split(&self, indices: &[usize], sd: f64) -> Option<Split> {
        let n = indices.len();
        let m = self.min_leaf_size.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = indices.to_vec();
        for col in 0..self.features.len() {
            order.sort_by(|&a, &b| self.rows[a][col].total_cmp(&self.rows[b][col]));
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let (total, total_sq) = order
                .iter()
                .fold((0.0, 0.0), |(s, q), &i| (s + self.y[i], q + self.y[i] * self.y[i]));
            for k in 1..n {
                let prev = order[k - 1];
                sum += self.y[prev];
                sum_sq += self.y[prev] * self.y[prev];
                if k < m || n - k < m {
                    continue;
                }
                let (lo, hi) = (self.rows[prev][col], self.rows[order[k]][col]);
                if lo >= hi {
                    continue;
                }
                let kl = k as f64;
                let kr = (n - k) as f64;
                let sd_l = sd_from_sums(sum, sum_sq, kl);
                let sd_r = sd_from_sums(total - sum, total_sq - sum_sq, kr);
                let sdr = sd - (kl * sd_l + kr * sd_r) / n as f64;
                if best.is_none_or(|(b, _, _)| sdr > b) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((sdr, col, threshold));
                }
            }
        }
        let (sdr, column, threshold) = best?;
        if sdr <= 0.0 {
            return None;
        }
        let (left, right) = indices
            .iter()
            .partition(|&&i| self.rows[i][column] <= threshold);
        Some(Split {
            column,
            threshold,
            left,
            right,
        })
    }
}

fn sd_from_sums(sum: f64, sum_sq: f64, n: f64) -> f64 {
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0).sqrt()
}

fn population_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, snr: f64) -> FeatureVector {
        FeatureVector {
            rsrp: rng.random_range(-120.0..-80.0),
            rsrq: rng.random_range(-11.0..-4.0),
            snr,
            cqi: rng.random_range(0..=15) as f64,
            payload_bytes: rng.random_range(1e5..5e6),
            speed: None,
        }
    }

    fn step_dataset(n: usize, seed: u64) -> Vec<LabeledSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let snr = rng.random_range(0.0..20.0);
                let features = random_features(&mut rng, snr);
                LabeledSample {
                    features,
                    rate: if snr < 10.0 { 1.0 } else { 9.0 },
                }
            })
            .collect()
    }

    /// Exhaustive split search over the snr column only, independent of the
    /// prefix-sum scan used by the builder.
    fn brute_force_snr_threshold(data: &[LabeledSample], min_leaf: usize) -> f64 {
        let mut snrs: Vec<f64> = data.iter().map(|s| s.features.snr).collect();
        snrs.sort_by(f64::total_cmp);
        let sd = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let all: Vec<f64> = data.iter().map(|s| s.rate).collect();
        let mut best = (f64::MIN, 0.0);
        for w in snrs.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let l: Vec<f64> = data.iter().filter(|s| s.features.snr <= t).map(|s| s.rate).collect();
            let r: Vec<f64> = data.iter().filter(|s| s.features.snr > t).map(|s| s.rate).collect();
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let n = all.len() as f64;
            let sdr = sd(&all) - (l.len() as f64 * sd(&l) + r.len() as f64 * sd(&r)) / n;
            if sdr > best.0 {
                best = (sdr, t);
            }
        }
        best.1
    }

    #[test]
    fn constant_label_is_single_leaf() {
        let mut data = step_dataset(100, 3);
        for s in &mut data {
            s.rate = 5.0;
        }
        let tree = train_model_tree(&data, TreeParams::default()).unwrap();
        assert_eq!(tree.leaf_count(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let probe = random_features(&mut rng, 3.0);
        assert!((tree.predict(&probe) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn step_function_split() {
        let data = step_dataset(200, 11);
        let tree = train_model_tree(&data, TreeParams::default()).unwrap();
        let (feature, threshold) = tree.root_split().expect("tree should split");
        assert_eq!(feature, Feature::Snr);
        assert!((8.0..=12.0).contains(&threshold), "threshold {threshold}");
        let oracle = brute_force_snr_threshold(&data, tree.min_leaf_size);
        assert!((oracle - threshold).abs() < 1e-9, "oracle {oracle} vs {threshold}");

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert!((tree.predict(&random_features(&mut rng, 20.0)) - 9.0).abs() < 0.2);
        assert!((tree.predict(&random_features(&mut rng, 2.0)) - 1.0).abs() < 0.2);
    }

    #[test]
    fn leaves_partition_training_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<_> = (0..400)
            .map(|_| {
                let snr = rng.random_range(-5.0..30.0);
                let features = random_features(&mut rng, snr);
                let rate = if snr < 5.0 { 0.2 * snr + 2.0 } else { 0.6 * snr } + rng.random_range(-0.3..0.3);
                LabeledSample { features, rate }
            })
            .collect();
        let tree = train_model_tree(&data, TreeParams::default()).unwrap();
        let sizes = tree.leaf_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), data.len());
        let mut routed = vec![0usize; sizes.len()];
        for s in &data {
            routed[tree.leaf_index(&s.features)] += 1;
        }
        assert_eq!(routed, sizes);
        if sizes.len() > 1 {
            assert!(sizes.iter().all(|&n| n >= tree.min_leaf_size));
        }
    }

    #[test]
    fn rejects_small_min_leaf_and_empty() {
        let data = step_dataset(50, 1);
        let params = TreeParams {
            min_leaf_size: Some(3),
            ..TreeParams::default()
        };
        assert!(train_model_tree(&data, params).is_err());
        assert!(matches!(
            train_model_tree(&[], TreeParams::default()),
            Err(Error::EmptyDataset)
        ));
    }
}
