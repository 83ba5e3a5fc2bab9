//! Prints the transmission probability of the SNR metric over its range for
//! several exponents as CSV (`alpha,phi,probability`).
//!
//!     cargo run --example probability_curves > curves.csv

use cat_sched::metric::{export_analytic_curve, transmission_probability, MetricDefinition, TimingConfig};
use cat_sched::report::write_curve_csv;

fn main() -> cat_sched::Result<()> {
    let mut curves = Vec::new();
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        let def = MetricDefinition::snr().with_alpha(alpha);
        curves.push((alpha, export_analytic_curve(&def, 31)?));
    }
    write_curve_csv(&curves, std::io::stdout().lock())?;

    let timing = TimingConfig::default();
    let def = MetricDefinition::snr();
    for dt in [10.0, 30.0, 31.0, 120.0, 121.0] {
        eprintln!(
            "snr 20 dB, {dt:>5} s since last transfer: p = {:.5}",
            transmission_probability(&def, 20.0, dt, &timing)
        );
    }
    Ok(())
}
