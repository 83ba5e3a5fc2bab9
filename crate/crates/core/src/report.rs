//! Aggregation of run reports into summary statistics, deadline-miss tables
//! and indicator-binned goodput series, plus their CSV forms.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::Indicator;
use crate::sim::{dmr_of_ages, PolicyKind, RunReport, TransmissionRecord, Trigger};
use crate::trace::ChannelSample;

/// z-value of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;
pub const CI_METHOD: &str = "normal_1.96";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kpi {
    Goodput,
    Age,
}

impl Kpi {
    pub fn as_str(self) -> &'static str {
        match self {
            Kpi::Goodput => "goodput_mbps",
            Kpi::Age => "age_s",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "goodput_mbps" => Some(Kpi::Goodput),
            "age_s" => Some(Kpi::Age),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub q1: f64,
    pub q3: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        Some(SummaryStats {
            count: sorted.len(),
            mean,
            median: quantile_sorted(&sorted, 0.5),
            sd,
            q1: quantile_sorted(&sorted, 0.25),
            q3: quantile_sorted(&sorted, 0.75),
        })
    }
}

/// Linear interpolation between closest ranks.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// Percentile bootstrap interval for the mean of `values`.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return Err(Error::InvalidArgument("bootstrap needs values and at least one resample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&means, tail), quantile_sorted(&means, 1.0 - tail)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub kpi: Kpi,
    pub stats: SummaryStats,
}

/// Pools per-transfer goodputs and per-packet ages over all runs of each
/// policy. Policies appear in order of first occurrence.
pub fn summarize(reports: &[RunReport]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for report in reports {
        let idx = match groups.iter().position(|g| g.0 == report.policy) {
            Some(i) => i,
            None => {
                groups.push((report.policy.clone(), Vec::new(), Vec::new()));
                groups.len() - 1
            }
        };
        groups[idx].1.extend(report.goodputs());
        groups[idx].2.extend_from_slice(&report.ages);
    }
    let mut rows = Vec::new();
    for (policy, goodputs, ages) in groups {
        for (kpi, values) in [(Kpi::Goodput, goodputs), (Kpi::Age, ages)] {
            if let Some(stats) = SummaryStats::from_values(&values) {
                rows.push(SummaryRow {
                    policy: policy.clone(),
                    kpi,
                    stats,
                });
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmrRow {
    pub policy: String,
    pub t_min: f64,
    /// Miss ratio per deadline, aligned with [`DmrTable::deadlines`].
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmrTable {
    pub deadlines: Vec<f64>,
    pub rows: Vec<DmrRow>,
}

/// Deadline miss ratio per (policy, t_min), pooling the packet ages of all
/// matching runs.
pub fn dmr_table(reports: &[RunReport], deadlines: &[f64]) -> Result<DmrTable> {
    if deadlines.is_empty() || deadlines.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("deadlines must be non-empty and strictly increasing".into()));
    }
    let mut groups: Vec<(String, f64, Vec<f64>)> = Vec::new();
    for report in reports {
        let idx = match groups
            .iter()
            .position(|g| g.0 == report.policy && g.1 == report.t_min)
        {
            Some(i) => i,
            None => {
                groups.push((report.policy.clone(), report.t_min, Vec::new()));
                groups.len() - 1
            }
        };
        groups[idx].2.extend_from_slice(&report.ages);
    }
    let rows = groups
        .into_iter()
        .map(|(policy, t_min, ages)| DmrRow {
            policy,
            t_min,
            ratios: deadlines
                .iter()
                .map(|&d| dmr_of_ages(&ages, d).unwrap_or(f64::NAN))
                .collect(),
        })
        .collect();
    Ok(DmrTable {
        deadlines: deadlines.to_vec(),
        rows,
    })
}

impl std::fmt::Display for DmrTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:<24} {:>6}", "policy", "t_min")?;
        for d in &self.deadlines {
            write!(f, " {:>8}", format!("{d} s"))?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:<24} {:>6}", row.policy, row.t_min)?;
            for r in &row.ratios {
                write!(f, " {:>8.3}", r)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub center: f64,
    pub mean: f64,
    /// Half-width of the 95% normal-approximation interval of the mean.
    pub half_width: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub indicator: Indicator,
    pub bin_width: f64,
    pub bins: Vec<Bin>,
}

/// Mean goodput per bin of the indicator value at transfer start. Bins are
/// `[k·w, (k+1)·w)`; empty bins are omitted.
pub fn binned_correlation<'a>(
    records: impl IntoIterator<Item = &'a TransmissionRecord>,
    indicator: Indicator,
    bin_width: f64,
) -> Result<BinnedSeries> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width must be > 0, got {bin_width}")));
    }
    let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for record in records {
        if let Some(v) = record.indicator(indicator) {
            groups
                .entry((v / bin_width).floor() as i64)
                .or_default()
                .push(record.goodput);
        }
    }
    let bins = groups
        .into_iter()
        .map(|(k, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let half_width = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                Z_95 * var.sqrt() / n.sqrt()
            } else {
                0.0
            };
            Bin {
                center: (k as f64 + 0.5) * bin_width,
                mean,
                half_width,
                count: values.len(),
            }
        })
        .collect();
    Ok(BinnedSeries {
        indicator,
        bin_width,
        bins,
    })
}

/// Default bin widths for the start-time correlation plots.
pub fn default_bin_width(indicator: Indicator) -> f64 {
    match indicator {
        Indicator::Rsrp => 2.0,
        Indicator::Rsrq => 1.0,
        Indicator::Snr => 2.0,
        Indicator::Cqi => 1.0,
        Indicator::Speed => 2.0,
        Indicator::Payload => 250_000.0,
        Indicator::PredictedRate => 1.0,
    }
}

// ---------------------------------------------------------------------------
// CSV

pub const SUMMARY_HEADER: [&str; 8] = ["policy", "kpi", "count", "mean", "median", "sd", "q1", "q3"];
pub const BINNED_HEADER: [&str; 7] = [
    "indicator",
    "bin_center",
    "mean_goodput_mbps",
    "ci95_half_width",
    "count",
    "bin_width",
    "ci_method",
];
pub const TRANSFER_LOG_HEADER: [&str; 22] = [
    "policy",
    "kind",
    "t_min_s",
    "trace",
    "run",
    "seed",
    "start_s",
    "end_s",
    "bytes",
    "goodput_mbps",
    "trigger",
    "sample_t_s",
    "distance_m",
    "speed_mps",
    "rsrp_dbm",
    "rsrq_db",
    "snr_db",
    "cqi",
    "capacity_mbps",
    "predicted_mbps",
    "packets",
    "packet_gen_times_s",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        let s = &row.stats;
        w.write_record([
            row.policy.clone(),
            row.kpi.as_str().to_string(),
            s.count.to_string(),
            s.mean.to_string(),
            s.median.to_string(),
            s.sd.to_string(),
            s.q1.to_string(),
            s.q3.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&r.headers()?.clone(), &SUMMARY_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let kpi = Kpi::parse(&rec[1]).ok_or_else(|| Error::parse(row, "kpi", format!("unknown kpi `{}`", &rec[1])))?;
        rows.push(SummaryRow {
            policy: rec[0].to_string(),
            kpi,
            stats: SummaryStats {
                count: field(&rec, 2, row, "count")?,
                mean: field(&rec, 3, row, "mean")?,
                median: field(&rec, 4, row, "median")?,
                sd: field(&rec, 5, row, "sd")?,
                q1: field(&rec, 6, row, "q1")?,
                q3: field(&rec, 7, row, "q3")?,
            },
        });
    }
    Ok(rows)
}

pub fn write_dmr_csv<W: Write>(table: &DmrTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["policy".to_string(), "t_min_s".to_string()];
    header.extend(table.deadlines.iter().map(|d| format!("dmr_{d}s")));
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.policy.clone(), row.t_min.to_string()];
        rec.extend(row.ratios.iter().map(|r| r.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_dmr_csv<R: Read>(input: R) -> Result<DmrTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "policy" || &header[1] != "t_min_s" {
        return Err(Error::MissingHeader);
    }
    let deadlines = header
        .iter()
        .skip(2)
        .map(|h| {
            h.strip_prefix("dmr_")
                .and_then(|s| s.strip_suffix('s'))
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(1, h, "expected a dmr_<deadline>s column"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let ratios = (2..rec.len())
            .map(|c| field(&rec, c, row, &header[c]))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(DmrRow {
            policy: rec[0].to_string(),
            t_min: field(&rec, 1, row, "t_min_s")?,
            ratios,
        });
    }
    Ok(DmrTable { deadlines, rows })
}

pub fn write_binned_csv<W: Write>(series: &BinnedSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BINNED_HEADER)?;
    for bin in &series.bins {
        w.write_record([
            series.indicator.as_str().to_string(),
            bin.center.to_string(),
            bin.mean.to_string(),
            bin.half_width.to_string(),
            bin.count.to_string(),
            series.bin_width.to_string(),
            CI_METHOD.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_binned_csv<R: Read>(input: R) -> Result<Vec<Bin>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&r.headers()?.clone(), &BINNED_HEADER)?;
    let mut bins = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        bins.push(Bin {
            center: field(&rec, 1, row, "bin_center")?,
            mean: field(&rec, 2, row, "mean_goodput_mbps")?,
            half_width: field(&rec, 3, row, "ci95_half_width")?,
            count: field(&rec, 4, row, "count")?,
        });
    }
    Ok(bins)
}

/// `(alpha, phi, probability)` rows for analytic probability curves.
pub fn write_curve_csv<W: Write>(curves: &[(f64, Vec<(f64, f64)>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "phi", "probability"])?;
    for (alpha, points) in curves {
        for (phi, p) in points {
            w.write_record([alpha.to_string(), phi.to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per delivered transfer of every report.
pub fn write_transfer_log<W: Write>(reports: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRANSFER_LOG_HEADER)?;
    for report in reports {
        for r in &report.records {
            let c = &r.context;
            let gen_times = r
                .packet_generation_times
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            w.write_record([
                report.policy.clone(),
                report.kind.as_str().to_string(),
                report.t_min.to_string(),
                report.trace.clone(),
                report.run.to_string(),
                report.seed.to_string(),
                r.start.to_string(),
                r.end.to_string(),
                r.bytes.to_string(),
                r.goodput.to_string(),
                r.trigger.as_str().to_string(),
                c.t.to_string(),
                c.distance.to_string(),
                c.speed.to_string(),
                c.rsrp.to_string(),
                c.rsrq.to_string(),
                c.snr.to_string(),
                c.cqi.to_string(),
                opt(c.capacity),
                opt(r.predicted_rate),
                r.packet_generation_times.len().to_string(),
                gen_times,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds run reports from a transfer log. Rows are grouped by
/// (policy, t_min, trace, run, seed) in order of first occurrence.
pub fn parse_transfer_log<R: Read>(input: R) -> Result<Vec<RunReport>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&r.headers()?.clone(), &TRANSFER_LOG_HEADER)?;
    type Key = (String, u64, String, usize, u64);
    let mut groups: Vec<(Key, PolicyKind, Vec<TransmissionRecord>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let kind = parse_kind(&rec[1]).ok_or_else(|| Error::parse(row, "kind", format!("unknown policy kind `{}`", &rec[1])))?;
        let t_min: f64 = field(&rec, 2, row, "t_min_s")?;
        let key: Key = (
            rec[0].to_string(),
            t_min.to_bits(),
            rec[3].to_string(),
            field(&rec, 4, row, "run")?,
            field(&rec, 5, row, "seed")?,
        );
        let trigger = Trigger::parse(&rec[10]).ok_or_else(|| Error::parse(row, "trigger", format!("unknown trigger `{}`", &rec[10])))?;
        let cqi: u8 = field(&rec, 17, row, "cqi")?;
        let context = ChannelSample {
            t: field(&rec, 11, row, "sample_t_s")?,
            distance: field(&rec, 12, row, "distance_m")?,
            speed: field(&rec, 13, row, "speed_mps")?,
            rsrp: field(&rec, 14, row, "rsrp_dbm")?,
            rsrq: field(&rec, 15, row, "rsrq_db")?,
            snr: field(&rec, 16, row, "snr_db")?,
            cqi,
            capacity: opt_field(&rec, 18, row, "capacity_mbps")?,
        };
        let packets: usize = field(&rec, 20, row, "packets")?;
        let gen_times = rec[21]
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| Error::parse(row, "packet_gen_times_s", format!("bad time `{s}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if gen_times.len() != packets {
            return Err(Error::parse(
                row,
                "packet_gen_times_s",
                format!("{} generation times for {packets} packets", gen_times.len()),
            ));
        }
        let record = TransmissionRecord {
            start: field(&rec, 6, row, "start_s")?,
            end: field(&rec, 7, row, "end_s")?,
            bytes: field(&rec, 8, row, "bytes")?,
            goodput: field(&rec, 9, row, "goodput_mbps")?,
            packet_generation_times: gen_times,
            trigger,
            context,
            predicted_rate: opt_field(&rec, 19, row, "predicted_mbps")?,
        };
        if !(record.end > record.start) {
            return Err(Error::parse(row, "end_s", "transfer must end after it starts"));
        }
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.2.push(record),
            None => groups.push((key, kind, vec![record])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|((policy, t_min, trace, run, seed), kind, records)| {
            RunReport::from_records(policy, kind, f64::from_bits(t_min), trace, run, seed, records)
        })
        .collect())
}

fn parse_kind(s: &str) -> Option<PolicyKind> {
    Some(match s {
        "periodic" => PolicyKind::Periodic,
        "single_metric" => PolicyKind::SingleMetric,
        "optimistic" => PolicyKind::Optimistic,
        "pessimistic" => PolicyKind::Pessimistic,
        "weighted_mean" => PolicyKind::WeightedMean,
        "predicted_rate" => PolicyKind::PredictedRate,
        _ => return None,
    })
}

fn check_header(header: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if header.is_empty() {
        return Err(Error::MissingHeader);
    }
    for (i, name) in expected.iter().enumerate() {
        if header.get(i) != Some(*name) {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, row: usize, name: &str) -> Result<T> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse::<T>()
        .map_err(|_| Error::parse(row, name, format!("cannot parse `{raw}`")))
}

fn opt_field(rec: &csv::StringRecord, col: usize, row: usize, name: &str) -> Result<Option<f64>> {
    match rec.get(col) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, col, row, name).map(Some),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_interval() {
        let (lo, hi) = bootstrap_mean_ci(&[2.0; 10], 200, 0.95, 1).unwrap();
        assert_eq!((lo, hi), (2.0, 2.0));
        let values: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let (lo, hi) = bootstrap_mean_ci(&values, 2000, 0.95, 7).unwrap();
        assert!(lo < 19.5 && 19.5 < hi);
        assert!(hi - lo < 12.0);
        assert_eq!(bootstrap_mean_ci(&values, 2000, 0.95, 7).unwrap(), (lo, hi));
        assert!(bootstrap_mean_ci(&[], 10, 0.95, 1).is_err());
        assert!(bootstrap_mean_ci(&values, 10, 1.0, 1).is_err());
    }

    fn record(goodput: f64, snr: f64, ages: &[f64]) -> TransmissionRecord {
        let end = 1000.0;
        TransmissionRecord {
            start: end - 1.0,
            end,
            bytes: 50_000.0 * ages.len().max(1) as f64,
            goodput,
            packet_generation_times: ages.iter().map(|a| end - a).collect(),
            trigger: Trigger::Probabilistic,
            context: ChannelSample {
                t: end - 1.0,
                distance: 0.0,
                speed: 12.0,
                rsrp: -100.0,
                rsrq: -9.0,
                snr,
                cqi: 5,
                capacity: Some(goodput * 1.2),
            },
            predicted_rate: None,
        }
    }

    fn report(policy: &str, records: Vec<TransmissionRecord>) -> RunReport {
        RunReport::from_records(policy, PolicyKind::SingleMetric, 30.0, "trace", 0, 1, records)
    }

    #[test]
    fn summary_stats_fixtures() {
        let s = SummaryStats::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.median), (2.0, 2.0));
        let s = SummaryStats::from_values(&[7.5]).unwrap();
        assert_eq!((s.mean, s.median, s.sd), (7.5, 7.5, 0.0));
        let s = SummaryStats::from_values(&[1.0, 1.0, 4.0]).unwrap();
        assert_eq!((s.mean, s.median), (2.0, 1.0));
        assert!((s.sd - 2f64.sqrt()).abs() < 1e-12);
        assert!(s.q1 <= s.median && s.median <= s.q3);
        assert!(SummaryStats::from_values(&[]).is_none());
    }

    #[test]
    fn summarize_pools_runs() {
        let a = report("snr", vec![record(1.0, 10.0, &[5.0]), record(2.0, 10.0, &[6.0])]);
        let b = report("snr", vec![record(3.0, 10.0, &[7.0])]);
        let rows = summarize(&[a, b]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].kpi, Kpi::Goodput);
        assert_eq!(rows[0].stats.count, 3);
        assert_eq!(rows[0].stats.mean, 2.0);
        assert_eq!(rows[1].stats.median, 6.0);
    }

    #[test]
    fn dmr_table_rows() {
        let r = report("snr", vec![record(1.0, 10.0, &[10.0, 40.0, 70.0, 200.0])]);
        let table = dmr_table(&[r], &[30.0, 60.0, 120.0, 180.0]).unwrap();
        assert_eq!(table.rows[0].ratios, vec![0.75, 0.5, 0.25, 0.25]);

        let fast = report("fast", vec![record(1.0, 10.0, &[1.0, 30.0])]);
        let table = dmr_table(&[fast], &[30.0, 60.0, 120.0, 180.0]).unwrap();
        assert_eq!(table.rows[0].ratios, vec![0.0; 4]);

        assert!(dmr_table(&[], &[60.0, 30.0]).is_err());
    }

    #[test]
    fn binned_fixtures() {
        let records = [record(1.0, 10.5, &[1.0]), record(3.0, 11.0, &[1.0]), record(2.0, 14.0, &[1.0])];
        let series = binned_correlation(&records, Indicator::Snr, 2.0).unwrap();
        let means: Vec<f64> = series.bins.iter().map(|b| b.mean).collect();
        let counts: Vec<usize> = series.bins.iter().map(|b| b.count).collect();
        assert_eq!(means, vec![2.0, 2.0]);
        assert_eq!(counts, vec![2, 1]);
        assert_eq!(series.bins[0].center, 11.0);
        assert_eq!(series.bins[1].half_width, 0.0);

        let same = [record(4.0, 10.0, &[1.0]), record(4.0, 10.2, &[1.0])];
        let series = binned_correlation(&same, Indicator::Snr, 5.0).unwrap();
        assert_eq!(series.bins.len(), 1);
        assert_eq!(series.bins[0].half_width, 0.0);

        let empty: [TransmissionRecord; 0] = [];
        assert!(binned_correlation(&empty, Indicator::Snr, 1.0).unwrap().bins.is_empty());
        assert!(binned_correlation(&empty, Indicator::Snr, 0.0).is_err());
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_summary_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "policy,kpi,count,mean,median,sd,q1,q3\n");

        let series = BinnedSeries {
            indicator: Indicator::Rsrp,
            bin_width: 2.0,
            bins: vec![],
        };
        let mut buf = Vec::new();
        write_binned_csv(&series, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);

        let r = report("snr", vec![record(1.0, 10.0, &[10.0])]);
        let table = dmr_table(&[r], &[30.0, 60.0, 120.0, 180.0]).unwrap();
        let mut buf = Vec::new();
        write_dmr_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("policy,t_min_s,dmr_30s,dmr_60s,dmr_120s,dmr_180s\n"), "{text}");
    }

    #[test]
    fn transfer_log_round_trip() {
        let mut rec = record(2.5, 12.25, &[3.0, 4.0]);
        rec.predicted_rate = Some(7.125);
        let reports = vec![report("snr", vec![rec, record(1.5, 3.0, &[1.0])]), report("cqi", vec![])];
        let mut buf = Vec::new();
        write_transfer_log(&reports, &mut buf).unwrap();
        let back = parse_transfer_log(buf.as_slice()).unwrap();
        // runs without transfers leave no rows
        assert_eq!(back.len(), 1);
        assert_eq!(back[0], reports[0]);
    }

    #[test]
    fn transfer_log_malformed_row() {
        let mut buf = Vec::new();
        write_transfer_log(&[report("snr", vec![record(2.5, 12.0, &[3.0])])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",probabilistic,", ",sometimes,");
        let err = parse_transfer_log(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("trigger"), "{err}");
    }
}
