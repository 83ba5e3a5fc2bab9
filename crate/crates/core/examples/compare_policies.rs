//! Periodic uploads against channel-aware policies on a one-hour suburban
//! drive: goodput summary and deadline-miss table.

use cat_sched::metric::{MetricDefinition, TimingConfig};
use cat_sched::report::{dmr_table, summarize, Kpi};
use cat_sched::sim::{sweep_with_jobs, PolicyConfig, SensorConfig, DEFAULT_DEADLINES};
use cat_sched::trace::{generate_synthetic_trace, TrackProfile};

fn main() -> cat_sched::Result<()> {
    let traces = vec![generate_synthetic_trace(&TrackProfile::suburban(), 3600.0, 1.0, 1)?];
    let mut policies = Vec::new();
    for t_min in [10.0, 30.0] {
        let t = TimingConfig::new(t_min, 120.0, 1.0)?;
        let suffix = format!("_tmin{t_min}");
        policies.push(PolicyConfig::periodic(t).with_name(format!("periodic{suffix}")));
        for def in MetricDefinition::channel_defaults() {
            let name = format!("{}{suffix}", def.name);
            policies.push(PolicyConfig::single_metric(def, t).with_name(name));
        }
        let all = MetricDefinition::channel_defaults();
        policies.push(PolicyConfig::optimistic(all.clone(), t).with_name(format!("optimistic{suffix}")));
        policies.push(PolicyConfig::pessimistic(all, t).with_name(format!("pessimistic{suffix}")));
    }
    let reports = sweep_with_jobs(&policies, &SensorConfig::default(), &traces, 5, 1, 4)?;

    println!("{:<20} {:>9} {:>9} {:>9}", "policy", "goodput", "median", "age");
    let rows = summarize(&reports);
    for pair in rows.chunks(2) {
        let goodput = pair.iter().find(|r| r.kpi == Kpi::Goodput).unwrap();
        let age = pair.iter().find(|r| r.kpi == Kpi::Age).unwrap();
        println!(
            "{:<20} {:>9.2} {:>9.2} {:>9.1}",
            goodput.policy, goodput.stats.mean, goodput.stats.median, age.stats.mean
        );
    }
    println!();
    print!("{}", dmr_table(&reports, &DEFAULT_DEADLINES)?);
    Ok(())
}
