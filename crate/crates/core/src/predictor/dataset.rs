use std::io::Read;
use std::path::Path;

use super::features::{FeatureVector, LabeledSample};
use crate::error::{Error, Result};
use crate::sim::TransmissionRecord;

const REQUIRED: [&str; 6] = ["rsrp_dbm", "rsrq_db", "snr_db", "cqi", "bytes", "goodput_mbps"];

/// Reads labelled samples from a CSV carrying at least the columns
/// `rsrp_dbm, rsrq_db, snr_db, cqi, bytes, goodput_mbps` (and optionally
/// `speed_mps`). Transfer logs written by the reporting module qualify.
pub fn parse_dataset_csv<R: Read>(input: R) -> Result<Vec<LabeledSample>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::MissingHeader);
    }
    let find = |name: &str| header.iter().position(|h| h == name);
    let mut cols = [0usize; 6];
    for (slot, name) in cols.iter_mut().zip(REQUIRED) {
        *slot = find(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let speed_col = find("speed_mps");

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let num = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(row, name, format!("cannot parse `{raw}` as a finite number")))
        };
        let speed = match speed_col.and_then(|c| record.get(c)) {
            None | Some("") => None,
            Some(_) => Some(num(speed_col.unwrap(), "speed_mps")?),
        };
        let features = FeatureVector {
            rsrp: num(cols[0], REQUIRED[0])?,
            rsrq: num(cols[1], REQUIRED[1])?,
            snr: num(cols[2], REQUIRED[2])?,
            cqi: num(cols[3], REQUIRED[3])?,
            payload_bytes: num(cols[4], REQUIRED[4])?,
            speed,
        };
        features
            .validate()
            .map_err(|e| Error::parse(row, "features", e.to_string()))?;
        let rate = num(cols[5], REQUIRED[5])?;
        if rate < 0.0 {
            return Err(Error::parse(row, REQUIRED[5], "rate must be non-negative"));
        }
        out.push(LabeledSample { features, rate });
    }
    Ok(out)
}

pub fn read_dataset_file(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_dataset_csv(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// One sample per transfer: start-time indicators and payload as features,
/// achieved goodput as label.
pub fn dataset_from_records<'a>(records: impl IntoIterator<Item = &'a TransmissionRecord>) -> Vec<LabeledSample> {
    records
        .into_iter()
        .map(|r| LabeledSample {
            features: FeatureVector::from_sample(&r.context, r.bytes),
            rate: r.goodput,
        })
        .collect()
}
