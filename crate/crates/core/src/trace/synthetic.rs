//! Seeded synthetic drive traces.
//!
//! SNR is the sum of a deterministic large-scale cell profile along the
//! route and an exponentially correlated (AR(1)) shadowing process whose
//! per-step coefficient follows the distance travelled. RSRP, RSRQ and CQI
//! are derived from SNR; the latent capacity is a truncated Shannon curve
//! with lognormal noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ChannelSample, ChannelTrace};
use crate::error::{Error, Result};

const SNR_LO: f64 = 0.0;
const SNR_HI: f64 = 30.0;
/// Physical range the shadowing process is clamped to, dB.
const SNR_CLAMP: (f64, f64) = (-10.0, 40.0);
const RSRP_NOISE_DB: f64 = 2.0;
const RSRQ_NOISE_DB: f64 = 1.0;
const CAPACITY_LOG_SIGMA: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Suburban,
    Highway,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Suburban => "suburban",
            ProfileKind::Highway => "highway",
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "suburban" => Ok(ProfileKind::Suburban),
            "highway" => Ok(ProfileKind::Highway),
            other => Err(Error::InvalidArgument(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackProfile {
    pub name: ProfileKind,
    /// Minimum and maximum speed, m/s.
    pub speed_range: (f64, f64),
    /// Route length in meters; the position wraps around at the end.
    pub length: f64,
    /// Distance over which shadowing correlation decays by 1/e, m.
    pub correlation_distance: f64,
    pub mean_snr: f64,
    /// Total SNR standard deviation (cell profile and shadowing), dB.
    pub snr_sd: f64,
    /// Share of each cell's span that is cell edge.
    pub cell_edge_fraction: f64,
    /// Span of one cell along the route, m.
    pub cell_span: f64,
    /// SNR drop from cell center to cell edge, dB.
    pub cell_edge_depth: f64,
    /// Upper bound of the latent capacity, MBit/s.
    pub cap_max: f64,
}

const KMH: f64 = 1.0 / 3.6;

impl TrackProfile {
    pub fn suburban() -> Self {
        TrackProfile {
            name: ProfileKind::Suburban,
            speed_range: (30.0 * KMH, 70.0 * KMH),
            length: 10_000.0,
            correlation_distance: 50.0,
            mean_snr: 12.0,
            snr_sd: 8.0,
            cell_edge_fraction: 0.3,
            cell_span: 1_200.0,
            cell_edge_depth: 10.0,
            cap_max: 20.0,
        }
    }

    pub fn highway() -> Self {
        TrackProfile {
            name: ProfileKind::Highway,
            speed_range: (80.0 * KMH, 130.0 * KMH),
            length: 13_000.0,
            correlation_distance: 100.0,
            mean_snr: 9.0,
            snr_sd: 9.0,
            cell_edge_fraction: 0.25,
            cell_span: 2_500.0,
            cell_edge_depth: 10.0,
            cap_max: 20.0,
        }
    }

    pub fn from_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Suburban => Self::suburban(),
            ProfileKind::Highway => Self::highway(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.speed_range;
        let ok = lo >= 0.0
            && lo < hi
            && self.length > 0.0
            && self.correlation_distance > 0.0
            && self.snr_sd >= 0.0
            && (0.0..=1.0).contains(&self.cell_edge_fraction)
            && self.cell_span > 0.0
            && self.cap_max > 0.0;
        if !ok {
            return Err(Error::InvalidConfig(format!("invalid track profile {:?}", self.name)));
        }
        if self.edge_profile_variance() > self.snr_sd * self.snr_sd {
            return Err(Error::InvalidConfig(
                "cell edge depth exceeds the total SNR standard deviation".into(),
            ));
        }
        Ok(())
    }

    /// Variance contributed by the two-level cell profile.
    fn edge_profile_variance(&self) -> f64 {
        let f = self.cell_edge_fraction;
        self.cell_edge_depth * self.cell_edge_depth * f * (1.0 - f)
    }

    /// Zero-mean SNR offset at `distance`: positive in the cell center,
    /// negative in the trailing edge share of each cell.
    fn cell_offset(&self, distance: f64) -> f64 {
        let f = self.cell_edge_fraction;
        let pos = (distance / self.cell_span).fract();
        if pos >= 1.0 - f {
            -self.cell_edge_depth * (1.0 - f)
        } else {
            self.cell_edge_depth * f
        }
    }
}

/// CQI index for an SNR in dB: two-dB bins starting at index 1 for 0 dB.
pub fn cqi_from_snr(snr: f64) -> u8 {
    ((snr / 2.0).floor() + 1.0).clamp(0.0, 15.0) as u8
}

fn shannon_scale(cap_max: f64) -> f64 {
    cap_max / (1.0 + 10f64.powf(SNR_HI / 10.0)).log2()
}

/// Noise-free achievable rate in MBit/s: a Shannon curve scaled so that
/// 30 dB SNR reaches `cap_max`, truncated at `cap_max`.
pub fn latent_capacity(sample: &ChannelSample, cap_max: f64) -> f64 {
    let linear = 10f64.powf(sample.snr / 10.0);
    (shannon_scale(cap_max) * (1.0 + linear).log2()).min(cap_max).max(0.0)
}

/// [`latent_capacity`] times lognormal noise drawn from `rng`.
pub fn noisy_latent_capacity<R: Rng + ?Sized>(sample: &ChannelSample, cap_max: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    latent_capacity(sample, cap_max) * (CAPACITY_LOG_SIGMA * z).exp()
}

pub fn generate_synthetic_trace(
    profile: &TrackProfile,
    duration: f64,
    sample_period: f64,
    seed: u64,
) -> Result<ChannelTrace> {
    profile.validate()?;
    if !(sample_period > 0.0 && duration >= sample_period && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need duration >= sample_period > 0, got duration={duration} sample_period={sample_period}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (duration / sample_period + 1e-9).floor() as usize + 1;
    let (v_lo, v_hi) = profile.speed_range;
    let speed_step = 0.05 * (v_hi - v_lo) * sample_period.sqrt();
    let shadow_sd = (profile.snr_sd.powi(2) - profile.edge_profile_variance()).sqrt();

    let mut speed = rng.random_range(v_lo..=v_hi);
    let mut distance = rng.random_range(0.0..profile.length);
    let mut shadow = shadow_sd * rng.sample::<f64, _>(StandardNormal);
    let mut samples = Vec::with_capacity(count);

    for i in 0..count {
        if i > 0 {
            speed = reflect(speed + speed_step * rng.sample::<f64, _>(StandardNormal), v_lo, v_hi);
            let step = speed * sample_period;
            distance = (distance + step) % profile.length;
            let rho = (-step / profile.correlation_distance).exp();
            shadow = rho * shadow + (1.0 - rho * rho).sqrt() * shadow_sd * rng.sample::<f64, _>(StandardNormal);
        }
        let snr = (profile.mean_snr + profile.cell_offset(distance) + shadow).clamp(SNR_CLAMP.0, SNR_CLAMP.1);
        let scaled = (snr - SNR_LO) / (SNR_HI - SNR_LO);
        let rsrp = (-120.0 + 40.0 * scaled + RSRP_NOISE_DB * rng.sample::<f64, _>(StandardNormal)).clamp(-130.0, -70.0);
        let rsrq = (-14.0 + 11.0 * scaled + RSRQ_NOISE_DB * rng.sample::<f64, _>(StandardNormal)).clamp(-14.0, -3.0);
        let mut sample = ChannelSample {
            t: i as f64 * sample_period,
            distance,
            speed,
            rsrp,
            rsrq,
            snr,
            cqi: cqi_from_snr(snr),
            capacity: None,
        };
        sample.capacity = Some(noisy_latent_capacity(&sample, profile.cap_max, &mut rng));
        samples.push(sample);
    }
    ChannelTrace::new(format!("{}-{seed}", profile.name.as_str()), samples)
}

fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let v = if v < lo { 2.0 * lo - v } else { v };
    let v = if v > hi { 2.0 * hi - v } else { v };
    v.clamp(lo, hi)
}
