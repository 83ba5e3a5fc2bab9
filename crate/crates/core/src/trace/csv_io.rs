use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use super::{ChannelSample, ChannelTrace};
use crate::error::{Error, Result};

/// Column order written by [`write_trace_csv`]. The last column is optional
/// on input.
pub const TRACE_COLUMNS: [&str; 8] = [
    "t_s",
    "distance_m",
    "speed_mps",
    "rsrp_dbm",
    "rsrq_db",
    "snr_db",
    "cqi",
    "capacity_mbps",
];

pub fn parse_trace_csv<R: Read>(input: R) -> Result<ChannelTrace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::MissingHeader);
    }
    let find = |name: &str| header.iter().position(|h| h == name);
    let mut mandatory = [0usize; 7];
    for (slot, name) in mandatory.iter_mut().zip(&TRACE_COLUMNS[..7]) {
        *slot = find(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let capacity_col = find(TRACE_COLUMNS[7]);

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let num = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| Error::parse(row, name, format!("cannot parse `{raw}` as a number")))
        };
        let [t, distance, speed, rsrp, rsrq, snr, cqi] = mandatory;
        let cqi_raw = num(cqi, "cqi")?;
        if cqi_raw.fract() != 0.0 || !(0.0..=15.0).contains(&cqi_raw) {
            return Err(Error::parse(row, "cqi", format!("cqi must be an integer in [0, 15], got {cqi_raw}")));
        }
        let capacity = match capacity_col.and_then(|c| record.get(c)) {
            None | Some("") => None,
            Some(_) => Some(num(capacity_col.unwrap(), "capacity_mbps")?),
        };
        let sample = ChannelSample {
            t: num(t, "t_s")?,
            distance: num(distance, "distance_m")?,
            speed: num(speed, "speed_mps")?,
            rsrp: num(rsrp, "rsrp_dbm")?,
            rsrq: num(rsrq, "rsrq_db")?,
            snr: num(snr, "snr_db")?,
            cqi: cqi_raw as u8,
            capacity,
        };
        if let Some(prev) = samples.last() {
            let prev: &ChannelSample = prev;
            if sample.t <= prev.t {
                return Err(Error::NonMonotoneTimestamp { row });
            }
        }
        samples.push(sample);
    }
    ChannelTrace::new("", samples)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<ChannelTrace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_trace_csv(BufReader::new(file))
        .map(|t| t.with_name(name))
        .map_err(|e| e.in_file(path))
}

pub fn write_trace_csv<W: Write>(trace: &ChannelTrace, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TRACE_COLUMNS)?;
    for s in trace.samples() {
        let capacity = s.capacity.map(|c| c.to_string()).unwrap_or_default();
        writer.write_record([
            s.t.to_string(),
            s.distance.to_string(),
            s.speed.to_string(),
            s.rsrp.to_string(),
            s.rsrq.to_string(),
            s.snr.to_string(),
            s.cqi.to_string(),
            capacity,
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "t_s,distance_m,speed_mps,rsrp_dbm,rsrq_db,snr_db,cqi,capacity_mbps\n";

    #[test]
    fn two_rows() {
        let csv = format!("{HEADER}0,0,10,-100,-9,12,7,8.5\n1,10,10,-98,-8.5,13,7,9\n");
        let trace = parse_trace_csv(csv.as_bytes()).unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.samples()[1].capacity, Some(9.0));
    }

    #[test]
    fn capacity_optional_and_columns_reordered() {
        let csv = "snr_db,t_s,distance_m,speed_mps,rsrp_dbm,rsrq_db,cqi\n12,0,0,10,-100,-9,7\n";
        let trace = parse_trace_csv(csv.as_bytes()).unwrap();
        assert_eq!(trace.samples()[0].snr, 12.0);
        assert_eq!(trace.samples()[0].capacity, None);
    }

    #[test]
    fn empty_file() {
        let err = parse_trace_csv("".as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "missing header");
    }

    #[test]
    fn non_monotone() {
        let csv = format!("{HEADER}5,0,10,-100,-9,12,7,8\n4,10,10,-98,-8.5,13,7,9\n");
        let err = parse_trace_csv(csv.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "non-monotone timestamp at row 3");
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "t_s,distance_m,speed_mps,rsrp_dbm,snr_db,cqi\n0,0,10,-100,12,7\n";
        let err = parse_trace_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "rsrq_db"), "{err}");
    }

    #[test]
    fn bad_number_names_row_and_column() {
        let csv = format!("{HEADER}0,0,10,-100,-9,12,7,8\n1,10,fast,-98,-8.5,13,7,9\n");
        let err = parse_trace_csv(csv.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("speed_mps"), "{msg}");
    }

    #[test]
    fn bad_cqi() {
        let csv = format!("{HEADER}0,0,10,-100,-9,12,7.5,8\n");
        assert!(parse_trace_csv(csv.as_bytes()).is_err());
        let csv = format!("{HEADER}0,0,10,-100,-9,12,16,8\n");
        assert!(parse_trace_csv(csv.as_bytes()).is_err());
    }
}
