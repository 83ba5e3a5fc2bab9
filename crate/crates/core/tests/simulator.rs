use cat_sched::metric::{MetricDefinition, TimingConfig};
use cat_sched::sim::{compute_dmr, run_simulation, sweep, PolicyConfig, RunReport, SensorConfig, Trigger};
use cat_sched::trace::{cqi_from_snr, generate_synthetic_trace, ChannelSample, ChannelTrace, ProfileKind, TrackProfile};

fn constant_trace(seconds: usize, snr: f64, capacity: f64) -> ChannelTrace {
    let samples = (0..=seconds)
        .map(|i| ChannelSample {
            t: i as f64,
            distance: 15.0 * i as f64,
            speed: 15.0,
            rsrp: -120.0 + 40.0 * snr / 30.0,
            rsrq: -14.0 + 11.0 * snr / 30.0,
            snr,
            cqi: cqi_from_snr(snr),
            capacity: Some(capacity),
        })
        .collect();
    ChannelTrace::new("constant", samples).unwrap()
}

fn all_policies(t: TimingConfig) -> Vec<PolicyConfig> {
    let channel = MetricDefinition::channel_defaults();
    let mut policies = vec![PolicyConfig::periodic(t)];
    policies.extend(channel.iter().cloned().map(|m| PolicyConfig::single_metric(m, t)));
    policies.push(PolicyConfig::optimistic(channel.clone(), t));
    policies.push(PolicyConfig::pessimistic(channel.clone(), t));
    policies.push(PolicyConfig::weighted_mean(channel, vec![2.0, 1.0, 1.0, 1.0], t));
    policies
}

fn check_run(report: &RunReport, t: &TimingConfig) {
    let mut previous: Option<(f64, f64)> = None;
    for r in &report.records {
        assert!(r.end > r.start);
        if let Some((start, end)) = previous {
            assert!(r.start >= end, "overlapping transfers");
            assert!(r.start - start >= t.t_min);
            assert!(r.start - end <= t.t_max + t.t_decision + 1e-9);
        }
        for age in r.ages() {
            assert!(age >= r.duration() - 1e-9);
        }
        previous = Some((r.start, r.end));
    }
    assert_eq!(report.delivered_packets() + report.undelivered_packets, report.generated_packets);
}

#[test]
fn invariants_hold_for_every_policy() {
    for kind in [ProfileKind::Suburban, ProfileKind::Highway] {
        let trace = generate_synthetic_trace(&TrackProfile::from_kind(kind), 1800.0, 1.0, 21).unwrap();
        for t_min in [10.0, 30.0] {
            let t = TimingConfig::new(t_min, 120.0, 1.0).unwrap();
            for policy in all_policies(t) {
                for seed in 0..3 {
                    let report = run_simulation(&policy, &SensorConfig::default(), &trace, seed).unwrap();
                    check_run(&report, &t);
                    let dmr: Vec<f64> = (0..40).map(|i| compute_dmr(&report, i as f64 * 10.0).unwrap()).collect();
                    assert!(dmr.windows(2).all(|w| w[1] <= w[0]));
                }
            }
        }
    }
}

/// A reading generated right after a transfer starts waits for that
/// transfer, the idle period and the next transfer, so the worst age is
/// bounded by two consecutive transfer durations plus `t_max + t_decision`.
#[test]
fn worst_age_bounded_by_consecutive_transfer_pair() {
    for kind in [ProfileKind::Suburban, ProfileKind::Highway] {
        let trace = generate_synthetic_trace(&TrackProfile::from_kind(kind), 3600.0, 1.0, 4).unwrap();
        let t = TimingConfig::new(30.0, 120.0, 1.0).unwrap();
        for policy in all_policies(t) {
            let report = run_simulation(&policy, &SensorConfig::default(), &trace, 4).unwrap();
            let first = report.records.first().map_or(0.0, |r| r.duration());
            let pair = report
                .records
                .windows(2)
                .map(|w| w[0].duration() + w[1].duration())
                .fold(first, f64::max);
            let bound = pair + t.t_max + t.t_decision;
            let worst = report.ages.iter().copied().fold(0.0, f64::max);
            assert!(worst <= bound + 1e-9, "{}: age {worst} > bound {bound}", policy.name);
            assert_eq!(compute_dmr(&report, bound).unwrap(), 0.0);
        }
    }
}

#[test]
fn more_capacity_means_more_goodput() {
    let t = TimingConfig::default();
    for policy in all_policies(t) {
        let slow = run_simulation(&policy, &SensorConfig::default(), &constant_trace(1200, 18.0, 4.0), 8).unwrap();
        let fast = run_simulation(&policy, &SensorConfig::default(), &constant_trace(1200, 18.0, 9.0), 8).unwrap();
        assert!(fast.mean_goodput > slow.mean_goodput, "{}", policy.name);
    }
}

#[test]
fn pinned_metric_waits_for_the_timeout() {
    let t = TimingConfig::default();
    let trace = constant_trace(1200, -5.0, 10.0);
    let policy = PolicyConfig::single_metric(MetricDefinition::snr(), t);
    let report = run_simulation(&policy, &SensorConfig::default(), &trace, 3).unwrap();
    assert!(!report.records.is_empty());
    let mut last_end = trace.start();
    for r in &report.records {
        assert_eq!(r.trigger, Trigger::ForcedTMax);
        let gap = r.start - last_end;
        assert!(gap > t.t_max && gap <= t.t_max + t.t_decision, "{gap}");
        last_end = r.end;
    }
}

#[test]
fn seeds_change_probabilistic_runs_only() {
    let trace = generate_synthetic_trace(&TrackProfile::suburban(), 1800.0, 1.0, 2).unwrap();
    let t = TimingConfig::new(10.0, 120.0, 1.0).unwrap();
    let cat = PolicyConfig::single_metric(MetricDefinition::rsrp(), t);
    let a = run_simulation(&cat, &SensorConfig::default(), &trace, 1).unwrap();
    let b = run_simulation(&cat, &SensorConfig::default(), &trace, 2).unwrap();
    assert_ne!(a.records, b.records);
    assert_eq!(a, run_simulation(&cat, &SensorConfig::default(), &trace, 1).unwrap());

    let periodic = PolicyConfig::periodic(t);
    let p1 = run_simulation(&periodic, &SensorConfig::default(), &trace, 1).unwrap();
    let p2 = run_simulation(&periodic, &SensorConfig::default(), &trace, 2).unwrap();
    assert_eq!(p1.records, p2.records);
}

#[test]
fn sweep_runs_every_pair() {
    let traces: Vec<_> = (0..2)
        .map(|s| generate_synthetic_trace(&TrackProfile::highway(), 600.0, 1.0, s).unwrap())
        .collect();
    let policies = all_policies(TimingConfig::default());
    let reports = sweep(&policies, &SensorConfig::default(), &traces, 3, 100).unwrap();
    assert_eq!(reports.len(), policies.len() * traces.len() * 3);
    assert_eq!(reports[0].seed, 100);
    assert_eq!(reports[2].seed, 102);
    assert_eq!(reports[3].trace, traces[1].name());
}
