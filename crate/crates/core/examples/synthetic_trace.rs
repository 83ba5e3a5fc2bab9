//! Generates a highway trace, writes it as CSV and prints a short profile.
//!
//!     cargo run --example synthetic_trace -- /tmp/highway.csv

use cat_sched::trace::{generate_synthetic_trace, read_trace_file, write_trace_csv, TrackProfile};

fn main() -> cat_sched::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "highway.csv".into());
    let trace = generate_synthetic_trace(&TrackProfile::highway(), 900.0, 1.0, 7)?;
    write_trace_csv(&trace, std::fs::File::create(&path)?)?;

    let back = read_trace_file(&path)?;
    let snr: Vec<f64> = back.samples().iter().map(|s| s.snr).collect();
    let cap: Vec<f64> = back.samples().iter().filter_map(|s| s.capacity).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("{path}: {} samples over {} s", back.len(), back.duration());
    println!("mean snr {:.1} dB, mean capacity {:.2} MBit/s", mean(&snr), mean(&cap));
    for s in back.samples().iter().step_by(60).take(8) {
        println!(
            "t={:>4} km={:>5.2} v={:>4.1} m/s snr={:>5.1} cqi={:>2} cap={:>5.2}",
            s.t,
            s.distance / 1000.0,
            s.speed,
            s.snr,
            s.cqi,
            s.capacity.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
