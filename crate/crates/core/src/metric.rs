//! Channel-aware transmission probability model.
//!
//! A [`MetricDefinition`] maps the current value of a channel-quality metric
//! onto the unit interval, raises it to a weighting exponent and gates the
//! result with the minimum/maximum inter-transmission timeouts of a
//! [`TimingConfig`]. Several per-metric probabilities can be merged with a
//! [`Combiner`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantity a metric (or a reporting axis) reads from the channel context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Rsrp,
    Rsrq,
    Snr,
    Cqi,
    Speed,
    Payload,
    /// Output of a trained data-rate predictor.
    PredictedRate,
}

impl Indicator {
    pub const CHANNEL: [Indicator; 4] = [Indicator::Rsrp, Indicator::Rsrq, Indicator::Snr, Indicator::Cqi];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Rsrp => "rsrp",
            Indicator::Rsrq => "rsrq",
            Indicator::Snr => "snr",
            Indicator::Cqi => "cqi",
            Indicator::Speed => "speed",
            Indicator::Payload => "payload",
            Indicator::PredictedRate => "predicted_rate",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "rsrp" => Indicator::Rsrp,
            "rsrq" => Indicator::Rsrq,
            "snr" => Indicator::Snr,
            "cqi" => Indicator::Cqi,
            "speed" => Indicator::Speed,
            "payload" => Indicator::Payload,
            "predicted_rate" => Indicator::PredictedRate,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Indicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Larger values mean a better channel.
    Conducive,
    /// Larger values mean a worse channel.
    Harmful,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDefinition {
    pub name: String,
    pub source: Indicator,
    pub phi_min: f64,
    pub phi_max: f64,
    pub alpha: f64,
    #[serde(default = "default_polarity")]
    pub polarity: Polarity,
}

fn default_polarity() -> Polarity {
    Polarity::Conducive
}

impl MetricDefinition {
    pub fn new(
        name: impl Into<String>,
        source: Indicator,
        phi_min: f64,
        phi_max: f64,
        alpha: f64,
        polarity: Polarity,
    ) -> Result<Self> {
        let def = MetricDefinition {
            name: name.into(),
            source,
            phi_min,
            phi_max,
            alpha,
            polarity,
        };
        def.validate()?;
        Ok(def)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi_min.is_finite() && self.phi_max.is_finite() && self.phi_min < self.phi_max) {
            return Err(Error::InvalidConfig(format!(
                "metric `{}`: phi_min ({}) must be strictly below phi_max ({})",
                self.name, self.phi_min, self.phi_max
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "metric `{}`: alpha must be >= 1, got {}",
                self.name, self.alpha
            )));
        }
        Ok(())
    }

    /// RSRP in dBm, [-120, -80], alpha 8.
    pub fn rsrp() -> Self {
        Self::builtin("rsrp", Indicator::Rsrp, -120.0, -80.0, 8.0)
    }

    /// RSRQ in dB, [-11, -4], alpha 6.
    pub fn rsrq() -> Self {
        Self::builtin("rsrq", Indicator::Rsrq, -11.0, -4.0, 6.0)
    }

    /// SNR in dB, [0, 30], alpha 8.
    pub fn snr() -> Self {
        Self::builtin("snr", Indicator::Snr, 0.0, 30.0, 8.0)
    }

    /// CQI index, [2, 16], alpha 6.
    pub fn cqi() -> Self {
        Self::builtin("cqi", Indicator::Cqi, 2.0, 16.0, 6.0)
    }

    /// Predicted data rate in MBit/s, [0, `phi_max`], alpha 8. The reference
    /// parametrisations use 15 or 18 MBit/s.
    pub fn predicted_rate(phi_max: f64) -> Self {
        Self::builtin("predicted_rate", Indicator::PredictedRate, 0.0, phi_max, 8.0)
    }

    /// The four passive channel indicators with their reference parameters.
    pub fn channel_defaults() -> Vec<Self> {
        vec![Self::rsrp(), Self::rsrq(), Self::snr(), Self::cqi()]
    }

    fn builtin(name: &str, source: Indicator, phi_min: f64, phi_max: f64, alpha: f64) -> Self {
        MetricDefinition {
            name: name.to_string(),
            source,
            phi_min,
            phi_max,
            alpha,
            polarity: Polarity::Conducive,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Minimum and maximum spacing between transfers plus the decision period,
/// all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub t_decision: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            t_min: 30.0,
            t_max: 120.0,
            t_decision: 1.0,
        }
    }
}

impl TimingConfig {
    pub fn new(t_min: f64, t_max: f64, t_decision: f64) -> Result<Self> {
        let timing = TimingConfig {
            t_min,
            t_max,
            t_decision,
        };
        timing.validate()?;
        Ok(timing)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min >= 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "timing: need 0 <= t_min < t_max, got t_min={} t_max={}",
                self.t_min, self.t_max
            )));
        }
        if !(self.t_decision > 0.0 && self.t_decision <= self.t_min) {
            return Err(Error::InvalidConfig(format!(
                "timing: need 0 < t_decision <= t_min, got t_decision={} t_min={}",
                self.t_decision, self.t_min
            )));
        }
        Ok(())
    }
}

/// Maps a metric value onto [0, 1]. Values outside the configured bounds are
/// clamped. Harmful metrics use the complement of the conducive mapping.
pub fn normalize_theta(def: &MetricDefinition, phi: f64) -> f64 {
    let scaled = ((phi - def.phi_min) / (def.phi_max - def.phi_min)).clamp(0.0, 1.0);
    match def.polarity {
        Polarity::Conducive => scaled,
        Polarity::Harmful => 1.0 - scaled,
    }
}

/// Transmission probability for one metric, `delta_t` seconds after the end
/// of the previous transfer.
pub fn transmission_probability(def: &MetricDefinition, phi: f64, delta_t: f64, timing: &TimingConfig) -> f64 {
    if delta_t <= timing.t_min {
        0.0
    } else if delta_t > timing.t_max {
        1.0
    } else {
        normalize_theta(def, phi).powf(def.alpha)
    }
}

pub fn combine_optimistic(probabilities: &[f64]) -> Result<f64> {
    probabilities
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyProbabilities)
}

pub fn combine_pessimistic(probabilities: &[f64]) -> Result<f64> {
    probabilities
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(Error::EmptyProbabilities)
}

pub fn combine_weighted_mean(probabilities: &[f64], weights: &[f64]) -> Result<f64> {
    validate_weights(weights, probabilities.len())?;
    // Summing in a canonical order makes the result independent of how the
    // (probability, weight) pairs are permuted.
    let mut pairs: Vec<(f64, f64)> = probabilities.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (weighted, total) = if weights.iter().all(|&g| g == weights[0]) {
        // equal weights cancel, so any common weight yields the same value
        (pairs.iter().map(|(p, _)| p).sum::<f64>(), pairs.len() as f64)
    } else {
        (pairs.iter().map(|(p, g)| p * g).sum(), pairs.iter().map(|(_, g)| g).sum())
    };
    // Rounding can push the quotient one ulp outside the input range.
    let lo = combine_pessimistic(probabilities)?;
    let hi = combine_optimistic(probabilities)?;
    Ok((weighted / total).clamp(lo, hi))
}

pub(crate) fn validate_weights(weights: &[f64], expected: usize) -> Result<()> {
    if expected == 0 {
        return Err(Error::EmptyProbabilities);
    }
    if weights.len() != expected {
        return Err(Error::InvalidWeights(format!(
            "expected {expected} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::InvalidWeights("weights must be finite and non-negative".into()));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidWeights("weights must not sum to zero".into()));
    }
    Ok(())
}

/// Rule merging the per-metric probabilities of a multi-metric policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Combiner {
    Optimistic,
    Pessimistic,
    WeightedMean { weights: Vec<f64> },
}

impl Combiner {
    pub fn combine(&self, probabilities: &[f64]) -> Result<f64> {
        match self {
            Combiner::Optimistic => combine_optimistic(probabilities),
            Combiner::Pessimistic => combine_pessimistic(probabilities),
            Combiner::WeightedMean { weights } => combine_weighted_mean(probabilities, weights),
        }
    }
}

/// Draws one uniform variate from `rng` and accepts with probability `p`.
/// Exactly one draw is consumed regardless of `p`.
pub fn bernoulli_decide<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < p
}

/// Samples `Θ(φ)^α` at `samples` evenly spaced points spanning the metric's
/// bounds. Timeouts are ignored.
pub fn export_analytic_curve(def: &MetricDefinition, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "analytic curve needs at least 2 samples, got {samples}"
        )));
    }
    let span = def.phi_max - def.phi_min;
    let last = (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let phi = if i + 1 == samples {
                def.phi_max
            } else {
                def.phi_min + span * i as f64 / last
            };
            (phi, normalize_theta(def, phi).powf(def.alpha))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn harmful() -> MetricDefinition {
        MetricDefinition::new("load", Indicator::Rsrq, 0.0, 10.0, 1.0, Polarity::Harmful).unwrap()
    }

    #[test]
    fn theta_boundaries_and_midpoint() {
        let rsrp = MetricDefinition::rsrp();
        assert_eq!(normalize_theta(&rsrp, -120.0), 0.0);
        assert_eq!(normalize_theta(&rsrp, -80.0), 1.0);
        assert_eq!(normalize_theta(&rsrp, -100.0), 0.5);
        assert_eq!(normalize_theta(&harmful(), 2.5), 0.75);
    }

    #[test]
    fn theta_clamps_out_of_range() {
        let rsrp = MetricDefinition::rsrp();
        assert_eq!(normalize_theta(&rsrp, -60.0), 1.0);
        assert_eq!(normalize_theta(&rsrp, -140.0), 0.0);
        assert_eq!(normalize_theta(&harmful(), -3.0), 1.0);
        assert_eq!(normalize_theta(&harmful(), 30.0), 0.0);
    }

    #[test]
    fn probability_branches() {
        let timing = TimingConfig::new(10.0, 120.0, 1.0).unwrap();
        let rsrp = MetricDefinition::rsrp();
        assert_eq!(transmission_probability(&rsrp, -80.0, 5.0, &timing), 0.0);
        assert_eq!(transmission_probability(&rsrp, -80.0, 10.0, &timing), 0.0);
        assert_eq!(transmission_probability(&rsrp, -130.0, 130.0, &timing), 1.0);

        let timing = TimingConfig::new(30.0, 120.0, 1.0).unwrap();
        assert_eq!(transmission_probability(&rsrp, -100.0, 60.0, &timing), 0.00390625);
        // t_max itself still uses the metric
        assert_eq!(transmission_probability(&rsrp, -100.0, 120.0, &timing), 0.00390625);
    }

    #[test]
    fn combinators() {
        assert_eq!(combine_optimistic(&[0.1, 0.6, 0.3]).unwrap(), 0.6);
        assert_eq!(combine_optimistic(&[0.4]).unwrap(), 0.4);
        assert_eq!(combine_optimistic(&[0.2, 0.2, 0.2]).unwrap(), 0.2);
        assert_eq!(combine_pessimistic(&[0.1, 0.6, 0.3]).unwrap(), 0.1);
        assert_eq!(combine_pessimistic(&[0.4]).unwrap(), 0.4);
        assert_eq!(combine_pessimistic(&[0.9, 0.9]).unwrap(), 0.9);
        assert!((combine_weighted_mean(&[0.2, 0.4], &[1.0, 1.0]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(combine_weighted_mean(&[0.2, 0.4], &[1.0, 0.0]).unwrap(), 0.2);
        assert_eq!(
            combine_weighted_mean(&[0.2, 0.4], &[2.0, 2.0]).unwrap(),
            combine_weighted_mean(&[0.2, 0.4], &[1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn combinator_errors() {
        assert!(matches!(combine_optimistic(&[]), Err(Error::EmptyProbabilities)));
        assert!(matches!(combine_pessimistic(&[]), Err(Error::EmptyProbabilities)));
        assert!(matches!(
            combine_weighted_mean(&[0.1, 0.2], &[1.0]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            combine_weighted_mean(&[0.1, 0.2], &[0.0, 0.0]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(combine_weighted_mean(&[0.1, 0.2], &[-1.0, 2.0]).is_err());
    }

    #[test]
    fn bernoulli_extremes_and_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert!(!bernoulli_decide(0.0, &mut rng));
            assert!(bernoulli_decide(1.0, &mut rng));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let hits = (0..10_000).filter(|_| bernoulli_decide(0.5, &mut rng)).count();
        let frac = hits as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&frac), "{frac}");
    }

    #[test]
    fn analytic_curve_contract() {
        let linear = MetricDefinition::snr().with_alpha(1.0);
        let curve = export_analytic_curve(&linear, 11).unwrap();
        assert_eq!(curve.first().copied(), Some((0.0, 0.0)));
        assert_eq!(curve.last().copied(), Some((30.0, 1.0)));

        let curve = export_analytic_curve(&MetricDefinition::snr(), 3).unwrap();
        assert_eq!(curve.len(), 3);
        assert!(curve.windows(2).all(|w| w[0].0 < w[1].0));
        assert!((curve[1].1 - 0.0039).abs() < 1e-4);

        assert!(export_analytic_curve(&linear, 1).is_err());
    }

    #[test]
    fn definition_validation() {
        assert!(MetricDefinition::new("x", Indicator::Snr, 5.0, 5.0, 1.0, Polarity::Conducive).is_err());
        assert!(MetricDefinition::new("x", Indicator::Snr, 0.0, 5.0, 0.5, Polarity::Conducive).is_err());
        assert!(MetricDefinition::new("x", Indicator::Snr, 0.0, 5.0, 2.5, Polarity::Conducive).is_ok());
        assert!(TimingConfig::new(30.0, 20.0, 1.0).is_err());
        assert!(TimingConfig::new(5.0, 20.0, 10.0).is_err());
        for def in MetricDefinition::channel_defaults() {
            def.validate().unwrap();
        }
    }
}
