//! Collects transfers from simulated drives, compares the model tree with
//! linear regression in 10-fold cross validation and saves the tree.
//!
//!     cargo run --example train_rate_model -- /tmp/rate-model.json

use cat_sched::metric::{MetricDefinition, TimingConfig};
use cat_sched::predictor::{cross_validate, dataset_from_records, save_model, Learner, Predictor};
use cat_sched::sim::{sweep, PolicyConfig, SensorConfig};
use cat_sched::trace::{generate_synthetic_trace, TrackProfile};

fn main() -> cat_sched::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "rate-model.json".into());
    let traces = (0..4)
        .map(|seed| generate_synthetic_trace(&TrackProfile::highway(), 3600.0, 1.0, 100 + seed))
        .collect::<cat_sched::Result<Vec<_>>>()?;
    let t = TimingConfig::new(10.0, 120.0, 1.0)?;
    let mut policies = vec![PolicyConfig::periodic(t)];
    policies.extend(MetricDefinition::channel_defaults().into_iter().map(|m| PolicyConfig::single_metric(m, t)));
    let reports = sweep(&policies, &SensorConfig::default(), &traces, 2, 1)?;
    let data = dataset_from_records(reports.iter().flat_map(|r| &r.records));
    println!("{} transfers", data.len());

    for (name, learner) in [("model tree", Learner::model_tree()), ("linear", Learner::Linear)] {
        println!("{name:<10} {}", cross_validate(&data, 10, &learner, 1)?);
    }

    let model = Learner::model_tree().train(&data)?;
    if let Predictor::ModelTree(tree) = &model {
        println!("tree: {} leaves, depth {}, root split {:?}", tree.leaf_count(), tree.depth(), tree.root_split());
    }
    save_model(&model, &path)?;
    println!("saved {path}");
    Ok(())
}
