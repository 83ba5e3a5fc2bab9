//! Per-metric probabilities for one channel sample and the three ways of
//! merging them.

use cat_sched::metric::{transmission_probability, Combiner, MetricDefinition, TimingConfig};
use cat_sched::trace::{cqi_from_snr, ChannelSample};

fn main() -> cat_sched::Result<()> {
    let sample = ChannelSample {
        t: 0.0,
        distance: 0.0,
        speed: 20.0,
        rsrp: -88.0,
        rsrq: -9.5,
        snr: 21.0,
        cqi: cqi_from_snr(21.0),
        capacity: None,
    };
    let timing = TimingConfig::default();
    let delta_t = 45.0;

    let metrics = MetricDefinition::channel_defaults();
    let mut probabilities = Vec::new();
    for def in &metrics {
        let phi = sample.indicator(def.source).expect("channel indicator");
        let p = transmission_probability(def, phi, delta_t, &timing);
        println!("{:<5} phi = {phi:>7.2}  p = {p:.5}", def.name);
        probabilities.push(p);
    }

    let combiners = [
        ("optimistic", Combiner::Optimistic),
        ("pessimistic", Combiner::Pessimistic),
        ("weighted", Combiner::WeightedMean { weights: vec![1.0, 1.0, 2.0, 1.0] }),
    ];
    for (name, combiner) in combiners {
        println!("{name:<12} {:.5}", combiner.combine(&probabilities)?);
    }
    Ok(())
}
