//! Channel and mobility time series.

mod csv_io;
mod synthetic;

pub use csv_io::{parse_trace_csv, read_trace_file, write_trace_csv, TRACE_COLUMNS};
pub use synthetic::{generate_synthetic_trace, latent_capacity, noisy_latent_capacity, cqi_from_snr, ProfileKind, TrackProfile};

use crate::error::{Error, Result};
use crate::metric::Indicator;

/// One report of the device's context at time `t` (seconds from trace start).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub t: f64,
    pub distance: f64,
    pub speed: f64,
    pub rsrp: f64,
    pub rsrq: f64,
    pub snr: f64,
    pub cqi: u8,
    /// Achievable uplink rate in MBit/s. Real measurements usually lack it.
    pub capacity: Option<f64>,
}

impl ChannelSample {
    /// Value of a passive indicator, `None` for indicators a sample does not
    /// carry (payload, predicted rate).
    pub fn indicator(&self, indicator: Indicator) -> Option<f64> {
        match indicator {
            Indicator::Rsrp => Some(self.rsrp),
            Indicator::Rsrq => Some(self.rsrq),
            Indicator::Snr => Some(self.snr),
            Indicator::Cqi => Some(f64::from(self.cqi)),
            Indicator::Speed => Some(self.speed),
            Indicator::Payload | Indicator::PredictedRate => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    name: String,
    samples: Vec<ChannelSample>,
}

impl ChannelTrace {
    /// Builds a trace, checking ordering and value ranges. Row numbers in
    /// errors count a header line, so the first sample is row 2.
    pub fn new(name: impl Into<String>, samples: Vec<ChannelSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            let row = i + 2;
            for (column, v) in [
                ("t_s", s.t),
                ("distance_m", s.distance),
                ("speed_mps", s.speed),
                ("rsrp_dbm", s.rsrp),
                ("rsrq_db", s.rsrq),
                ("snr_db", s.snr),
            ] {
                if !v.is_finite() {
                    return Err(Error::parse(row, column, "value must be finite"));
                }
            }
            if s.speed < 0.0 {
                return Err(Error::parse(row, "speed_mps", "speed must be non-negative"));
            }
            if s.cqi > 15 {
                return Err(Error::parse(row, "cqi", "cqi must lie in [0, 15]"));
            }
            if let Some(c) = s.capacity {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::parse(row, "capacity_mbps", "capacity must be finite and >= 0"));
                }
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::NonMonotoneTimestamp { row });
            }
        }
        Ok(ChannelTrace {
            name: name.into(),
            samples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn samples(&self) -> &[ChannelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// Zero-order hold lookup. Panics on an empty trace.
    pub fn sample_at(&self, t: f64) -> &ChannelSample {
        sample_at(self, t)
    }
}

/// Latest sample with `sample.t <= t`; the first sample for earlier times.
pub fn sample_at(trace: &ChannelTrace, t: f64) -> &ChannelSample {
    let samples = trace.samples();
    assert!(!samples.is_empty(), "sample_at on an empty trace");
    let idx = samples.partition_point(|s| s.t <= t);
    &samples[idx.saturating_sub(1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> ChannelSample {
        ChannelSample {
            t,
            distance: t * 10.0,
            speed: 10.0,
            rsrp: -100.0,
            rsrq: -9.0,
            snr: t,
            cqi: 3,
            capacity: Some(5.0),
        }
    }

    fn trace() -> ChannelTrace {
        ChannelTrace::new("t", (0..6).map(|i| sample(i as f64)).collect()).unwrap()
    }

    #[test]
    fn hold_semantics() {
        let trace = trace();
        assert_eq!(sample_at(&trace, 3.0).t, 3.0);
        assert_eq!(sample_at(&trace, 3.5).t, 3.0);
        assert_eq!(sample_at(&trace, 99.0).t, 5.0);
        assert_eq!(sample_at(&trace, -2.0).t, 0.0);
    }

    #[test]
    fn rejects_bad_samples() {
        let err = ChannelTrace::new("t", vec![sample(5.0), sample(4.0)]).unwrap_err();
        assert_eq!(err.to_string(), "non-monotone timestamp at row 3");

        let mut bad = sample(0.0);
        bad.cqi = 16;
        assert!(ChannelTrace::new("t", vec![bad]).is_err());

        let mut bad = sample(0.0);
        bad.capacity = Some(-1.0);
        assert!(ChannelTrace::new("t", vec![bad]).is_err());
    }

    #[test]
    fn indicator_lookup() {
        let s = sample(2.0);
        assert_eq!(s.indicator(Indicator::Cqi), Some(3.0));
        assert_eq!(s.indicator(Indicator::Snr), Some(2.0));
        assert_eq!(s.indicator(Indicator::Payload), None);
    }
}
