//! Uses a trained rate model as the scheduling metric and compares it with
//! the single-metric policies on unseen highway drives.

use std::sync::Arc;

use cat_sched::metric::{MetricDefinition, TimingConfig};
use cat_sched::predictor::{dataset_from_records, Learner};
use cat_sched::sim::{run_simulation, sweep, PolicyConfig, SensorConfig};
use cat_sched::trace::{generate_synthetic_trace, ChannelTrace, TrackProfile};

fn drives(seeds: std::ops::Range<u64>) -> cat_sched::Result<Vec<ChannelTrace>> {
    seeds
        .map(|seed| generate_synthetic_trace(&TrackProfile::highway(), 3600.0, 1.0, seed))
        .collect()
}

fn main() -> cat_sched::Result<()> {
    let sensor = SensorConfig::default();
    let t = TimingConfig::new(10.0, 120.0, 1.0)?;
    let mut baseline = vec![PolicyConfig::periodic(t)];
    baseline.extend(MetricDefinition::channel_defaults().into_iter().map(|m| PolicyConfig::single_metric(m, t)));

    let training = sweep(&baseline, &sensor, &drives(500..505)?, 1, 1)?;
    let data = dataset_from_records(training.iter().flat_map(|r| &r.records));
    let model = Arc::new(Learner::model_tree().train(&data)?);

    let mut policies = baseline;
    policies.push(PolicyConfig::predicted_rate(model, 18.0, t));
    let test = drives(0..8)?;
    for policy in &policies {
        let mut means = Vec::new();
        for (seed, trace) in test.iter().enumerate() {
            means.push(run_simulation(policy, &sensor, trace, seed as u64)?.mean_goodput);
        }
        println!("{:<15} mean goodput {:.2} MBit/s", policy.name, means.iter().sum::<f64>() / means.len() as f64);
    }
    Ok(())
}
