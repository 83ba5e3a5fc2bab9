//! Mean goodput per SNR and payload bin with 95% intervals, as written by
//! the `simulate` subcommand.

use cat_sched::metric::{Indicator, MetricDefinition, TimingConfig};
use cat_sched::report::{binned_correlation, default_bin_width, write_binned_csv};
use cat_sched::sim::{sweep, PolicyConfig, SensorConfig};
use cat_sched::trace::{generate_synthetic_trace, TrackProfile};

fn main() -> cat_sched::Result<()> {
    let traces = vec![generate_synthetic_trace(&TrackProfile::suburban(), 3600.0, 1.0, 3)?];
    let t = TimingConfig::new(10.0, 120.0, 1.0)?;
    let policies = vec![
        PolicyConfig::periodic(t),
        PolicyConfig::single_metric(MetricDefinition::snr(), t),
    ];
    let reports = sweep(&policies, &SensorConfig::default(), &traces, 10, 1)?;
    let records: Vec<_> = reports.iter().flat_map(|r| &r.records).collect();

    for indicator in [Indicator::Snr, Indicator::Payload] {
        let series = binned_correlation(records.iter().copied(), indicator, default_bin_width(indicator))?;
        write_binned_csv(&series, std::io::stdout().lock())?;
        println!();
    }
    Ok(())
}
