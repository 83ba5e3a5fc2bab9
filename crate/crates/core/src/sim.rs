//! Discrete-time replay of a sensor upload application over a channel trace.
//!
//! Every `t_decision` seconds the simulator appends the sensor readings
//! generated so far to the buffer and, unless a transfer is still running,
//! asks the policy whether to send the whole buffer now. A transfer's
//! duration follows from the latent capacity at its start and the payload
//! size. The spacing `Δt` used by the policy is measured from the end of the
//! previous transfer.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{
    bernoulli_decide, transmission_probability, validate_weights, Combiner, Indicator, MetricDefinition,
    TimingConfig,
};
use crate::predictor::{FeatureVector, Predictor, RateModel};
use crate::trace::{ChannelSample, ChannelTrace};

/// Fixed per-transfer protocol cost, bytes.
pub const OVERHEAD_BYTES: f64 = 250_000.0;

/// Deadlines evaluated by default, seconds.
pub const DEFAULT_DEADLINES: [f64; 4] = [30.0, 60.0, 120.0, 180.0];

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub frequency: f64,
    /// Bytes per reading.
    pub payload_size: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            frequency: 1.0,
            payload_size: 50_000.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidConfig(format!("sensor frequency must be > 0, got {}", self.frequency)));
        }
        if !(self.payload_size > 0.0 && self.payload_size.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sensor payload size must be > 0, got {}",
                self.payload_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Periodic,
    SingleMetric,
    Optimistic,
    Pessimistic,
    WeightedMean,
    PredictedRate,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Periodic => "periodic",
            PolicyKind::SingleMetric => "single_metric",
            PolicyKind::Optimistic => "optimistic",
            PolicyKind::Pessimistic => "pessimistic",
            PolicyKind::WeightedMean => "weighted_mean",
            PolicyKind::PredictedRate => "predicted_rate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolicyConfig {
    /// Label used to group reports.
    pub name: String,
    pub kind: PolicyKind,
    pub metrics: Vec<MetricDefinition>,
    pub weights: Option<Vec<f64>>,
    pub timing: TimingConfig,
    pub model: Option<Arc<Predictor>>,
}

impl PolicyConfig {
    /// Sends every `t_min` seconds after the previous transfer ended.
    pub fn periodic(timing: TimingConfig) -> Self {
        PolicyConfig {
            name: "periodic".into(),
            kind: PolicyKind::Periodic,
            metrics: Vec::new(),
            weights: None,
            timing,
            model: None,
        }
    }

    pub fn single_metric(metric: MetricDefinition, timing: TimingConfig) -> Self {
        PolicyConfig {
            name: metric.name.clone(),
            kind: PolicyKind::SingleMetric,
            metrics: vec![metric],
            weights: None,
            timing,
            model: None,
        }
    }

    pub fn optimistic(metrics: Vec<MetricDefinition>, timing: TimingConfig) -> Self {
        Self::combined(PolicyKind::Optimistic, metrics, None, timing)
    }

    pub fn pessimistic(metrics: Vec<MetricDefinition>, timing: TimingConfig) -> Self {
        Self::combined(PolicyKind::Pessimistic, metrics, None, timing)
    }

    pub fn weighted_mean(metrics: Vec<MetricDefinition>, weights: Vec<f64>, timing: TimingConfig) -> Self {
        Self::combined(PolicyKind::WeightedMean, metrics, Some(weights), timing)
    }

    /// Uses the model's rate prediction for the current buffer as the metric.
    pub fn predicted_rate(model: Arc<Predictor>, phi_max: f64, timing: TimingConfig) -> Self {
        PolicyConfig {
            name: "predicted_rate".into(),
            kind: PolicyKind::PredictedRate,
            metrics: vec![MetricDefinition::predicted_rate(phi_max)],
            weights: None,
            timing,
            model: Some(model),
        }
    }

    fn combined(kind: PolicyKind, metrics: Vec<MetricDefinition>, weights: Option<Vec<f64>>, timing: TimingConfig) -> Self {
        PolicyConfig {
            name: kind.as_str().into(),
            kind,
            metrics,
            weights,
            timing,
            model: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_probabilistic(&self) -> bool {
        self.kind != PolicyKind::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        self.timing.validate()?;
        for m in &self.metrics {
            m.validate()?;
        }
        let fail = |msg: String| Err(Error::InvalidConfig(format!("policy `{}`: {msg}", self.name)));
        match self.kind {
            PolicyKind::Periodic => {}
            PolicyKind::SingleMetric => {
                if self.metrics.len() != 1 {
                    return fail(format!("single_metric needs exactly one metric, got {}", self.metrics.len()));
                }
            }
            PolicyKind::Optimistic | PolicyKind::Pessimistic => {
                if self.metrics.is_empty() {
                    return fail("needs at least one metric".into());
                }
            }
            PolicyKind::WeightedMean => {
                let Some(weights) = &self.weights else {
                    return fail("weighted_mean needs weights".into());
                };
                if let Err(e) = validate_weights(weights, self.metrics.len()) {
                    return fail(e.to_string());
                }
            }
            PolicyKind::PredictedRate => {
                if self.model.is_none() {
                    return fail("predicted_rate needs a trained model".into());
                }
                match self.metrics.as_slice() {
                    [m] if m.source == Indicator::PredictedRate => {}
                    _ => return fail("predicted_rate needs exactly one predicted_rate metric".into()),
                }
            }
        }
        if self.kind != PolicyKind::PredictedRate && self.metrics.iter().any(|m| m.source == Indicator::PredictedRate) {
            return fail("predicted_rate metrics are only valid in a predicted_rate policy".into());
        }
        Ok(())
    }

    fn combiner(&self) -> Combiner {
        match self.kind {
            PolicyKind::Pessimistic => Combiner::Pessimistic,
            PolicyKind::WeightedMean => Combiner::WeightedMean {
                weights: self.weights.clone().unwrap_or_default(),
            },
            _ => Combiner::Optimistic,
        }
    }

    /// Transmission probability for the current context. The predicted rate
    /// (if any) is returned alongside.
    fn probability(&self, sample: &ChannelSample, buffer_bytes: f64, delta_t: f64) -> Result<(f64, Option<f64>)> {
        if self.kind == PolicyKind::Periodic {
            let p = if delta_t + EPS >= self.timing.t_min { 1.0 } else { 0.0 };
            return Ok((p, None));
        }
        let mut predicted = None;
        let mut probabilities = Vec::with_capacity(self.metrics.len());
        for metric in &self.metrics {
            let phi = match metric.source {
                Indicator::Payload => buffer_bytes,
                Indicator::PredictedRate => {
                    let model = self.model.as_ref().expect("validated");
                    let rate = model.predict(&FeatureVector::from_sample(sample, buffer_bytes));
                    predicted = Some(rate);
                    rate
                }
                other => sample.indicator(other).expect("channel indicator"),
            };
            probabilities.push(transmission_probability(metric, phi, delta_t, &self.timing));
        }
        Ok((self.combiner().combine(&probabilities)?, predicted))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Probabilistic,
    ForcedTMax,
    Periodic,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::Probabilistic => "probabilistic",
            Trigger::ForcedTMax => "forced_t_max",
            Trigger::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "probabilistic" => Some(Trigger::Probabilistic),
            "forced_t_max" => Some(Trigger::ForcedTMax),
            "periodic" => Some(Trigger::Periodic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRecord {
    pub start: f64,
    pub end: f64,
    pub bytes: f64,
    /// MBit/s.
    pub goodput: f64,
    pub packet_generation_times: Vec<f64>,
    pub trigger: Trigger,
    /// Channel context at the start of the transfer.
    pub context: ChannelSample,
    pub predicted_rate: Option<f64>,
}

impl TransmissionRecord {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn ages(&self) -> impl Iterator<Item = f64> + '_ {
        self.packet_generation_times.iter().map(move |g| self.end - g)
    }

    /// Value of `indicator` at the start of the transfer.
    pub fn indicator(&self, indicator: Indicator) -> Option<f64> {
        match indicator {
            Indicator::Payload => Some(self.bytes),
            Indicator::PredictedRate => self.predicted_rate,
            other => self.context.indicator(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub policy: String,
    pub kind: PolicyKind,
    pub t_min: f64,
    pub trace: String,
    pub run: usize,
    pub seed: u64,
    pub records: Vec<TransmissionRecord>,
    /// Generation-to-delivery age of every delivered reading, seconds.
    pub ages: Vec<f64>,
    pub generated_packets: usize,
    /// Readings still buffered (or in a cut-off transfer) when the run ended.
    pub undelivered_packets: usize,
    /// The trace ended while a transfer was in flight.
    pub truncated: bool,
    pub mean_goodput: f64,
    pub median_goodput: f64,
    /// (deadline, miss ratio) for [`DEFAULT_DEADLINES`].
    pub dmr: Vec<(f64, f64)>,
}

impl RunReport {
    /// Builds a report and its derived statistics from delivered records.
    pub fn from_records(
        policy: impl Into<String>,
        kind: PolicyKind,
        t_min: f64,
        trace: impl Into<String>,
        run: usize,
        seed: u64,
        records: Vec<TransmissionRecord>,
    ) -> Self {
        let ages: Vec<f64> = records.iter().flat_map(|r| r.ages()).collect();
        let delivered = ages.len();
        let goodputs: Vec<f64> = records.iter().map(|r| r.goodput).collect();
        let mut report = RunReport {
            policy: policy.into(),
            kind,
            t_min,
            trace: trace.into(),
            run,
            seed,
            records,
            ages,
            generated_packets: delivered,
            undelivered_packets: 0,
            truncated: false,
            mean_goodput: mean(&goodputs),
            median_goodput: median(&goodputs),
            dmr: Vec::new(),
        };
        report.dmr = DEFAULT_DEADLINES
            .iter()
            .map(|&d| (d, compute_dmr(&report, d).unwrap_or(f64::NAN)))
            .collect();
        report
    }

    pub fn goodputs(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.goodput)
    }

    pub fn delivered_packets(&self) -> usize {
        self.records.iter().map(|r| r.packet_generation_times.len()).sum()
    }

    pub fn max_transfer_duration(&self) -> f64 {
        self.records.iter().map(TransmissionRecord::duration).fold(0.0, f64::max)
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Application-layer rate of a `bytes` payload over a link of `capacity`
/// MBit/s after the fixed per-transfer overhead.
pub fn effective_goodput(capacity: f64, bytes: f64) -> f64 {
    capacity.max(0.0) * bytes / (bytes + OVERHEAD_BYTES)
}

/// Share of delivered readings older than `deadline` on arrival.
pub fn compute_dmr(report: &RunReport, deadline: f64) -> Result<f64> {
    dmr_of_ages(&report.ages, deadline)
}

pub(crate) fn dmr_of_ages(ages: &[f64], deadline: f64) -> Result<f64> {
    if ages.is_empty() {
        return Err(Error::InvalidArgument("no delivered packets to evaluate".into()));
    }
    Ok(ages.iter().filter(|&&a| a > deadline).count() as f64 / ages.len() as f64)
}

pub fn run_simulation(policy: &PolicyConfig, sensor: &SensorConfig, trace: &ChannelTrace, seed: u64) -> Result<RunReport> {
    run_simulation_indexed(policy, sensor, trace, 0, seed)
}

fn run_simulation_indexed(
    policy: &PolicyConfig,
    sensor: &SensorConfig,
    trace: &ChannelTrace,
    run: usize,
    seed: u64,
) -> Result<RunReport> {
    policy.validate()?;
    sensor.validate()?;
    let timing = policy.timing;
    if trace.is_empty() || trace.duration() + EPS < 2.0 * timing.t_max {
        return Err(Error::InvalidArgument(format!(
            "trace `{}` lasts {} s, need at least 2·t_max = {} s",
            trace.name(),
            trace.duration(),
            2.0 * timing.t_max
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = trace.start();
    let t_end = trace.end();
    let gen_period = 1.0 / sensor.frequency;

    let mut buffer: Vec<f64> = Vec::new();
    let mut next_reading = 0usize;
    let mut generated = 0usize;
    let mut last_end = t0;
    let mut busy_until = t0;
    let mut truncated = false;
    let mut records = Vec::new();

    for tick in 0usize.. {
        let now = t0 + tick as f64 * timing.t_decision;
        if now > t_end + EPS {
            break;
        }
        loop {
            let g = t0 + next_reading as f64 * gen_period;
            if g > now + EPS {
                break;
            }
            buffer.push(g);
            next_reading += 1;
            generated += 1;
        }
        if now + EPS < busy_until || buffer.is_empty() {
            continue;
        }

        let delta_t = now - last_end;
        let sample = trace.sample_at(now);
        let bytes = buffer.len() as f64 * sensor.payload_size;
        let (trigger, predicted) = if policy.kind == PolicyKind::Periodic {
            let (p, _) = policy.probability(sample, bytes, delta_t)?;
            (if p >= 1.0 { Some(Trigger::Periodic) } else { None }, None)
        } else if delta_t > timing.t_max {
            let predicted = match policy.kind {
                PolicyKind::PredictedRate => policy.probability(sample, bytes, delta_t)?.1,
                _ => None,
            };
            (Some(Trigger::ForcedTMax), predicted)
        } else if delta_t <= timing.t_min {
            (None, None)
        } else {
            let (p, predicted) = policy.probability(sample, bytes, delta_t)?;
            let fire = bernoulli_decide(p, &mut rng);
            (fire.then_some(Trigger::Probabilistic), predicted)
        };
        let Some(trigger) = trigger else {
            continue;
        };

        let capacity = sample.capacity.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "trace `{}` has no capacity at t = {} s; simulation needs the capacity column",
                trace.name(),
                sample.t
            ))
        })?;
        let goodput = effective_goodput(capacity, bytes);
        let duration = bytes * 8.0 / 1e6 / goodput;
        let end = now + duration;
        if !(goodput > 0.0) || end > t_end {
            truncated = true;
            break;
        }
        records.push(TransmissionRecord {
            start: now,
            end,
            bytes,
            goodput,
            packet_generation_times: std::mem::take(&mut buffer),
            trigger,
            context: *sample,
            predicted_rate: predicted,
        });
        last_end = end;
        busy_until = end;
    }
    // readings produced after a truncated transfer stay in the buffer
    loop {
        let g = t0 + next_reading as f64 * gen_period;
        if g > t_end + EPS {
            break;
        }
        buffer.push(g);
        next_reading += 1;
        generated += 1;
    }

    let mut report = RunReport::from_records(
        policy.name.clone(),
        policy.kind,
        timing.t_min,
        trace.name(),
        run,
        seed,
        records,
    );
    report.generated_packets = generated;
    report.undelivered_packets = buffer.len();
    report.truncated = truncated;
    if truncated {
        log::debug!(
            "run {} of `{}` on `{}`: trace ended during a transfer, {} readings undelivered",
            run,
            policy.name,
            trace.name(),
            buffer.len()
        );
    }
    Ok(report)
}

/// One report per (policy, trace, run), policy-major, with
/// `seed = base_seed + run`.
pub fn sweep(
    policies: &[PolicyConfig],
    sensor: &SensorConfig,
    traces: &[ChannelTrace],
    runs_per_pair: usize,
    base_seed: u64,
) -> Result<Vec<RunReport>> {
    sweep_with_jobs(policies, sensor, traces, runs_per_pair, base_seed, 1)
}

/// [`sweep`] on up to `jobs` worker threads. The output order does not
/// depend on `jobs`.
pub fn sweep_with_jobs(
    policies: &[PolicyConfig],
    sensor: &SensorConfig,
    traces: &[ChannelTrace],
    runs_per_pair: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<Vec<RunReport>> {
    if policies.is_empty() || traces.is_empty() || runs_per_pair == 0 {
        return Err(Error::InvalidArgument(
            "sweep needs at least one policy, one trace and one run".into(),
        ));
    }
    let mut tasks = Vec::with_capacity(policies.len() * traces.len() * runs_per_pair);
    for policy in policies {
        for trace in traces {
            for run in 0..runs_per_pair {
                tasks.push((policy, trace, run));
            }
        }
    }
    let run_one = |&(policy, trace, run): &(&PolicyConfig, &ChannelTrace, usize)| {
        run_simulation_indexed(policy, sensor, trace, run, base_seed.wrapping_add(run as u64))
    };
    if jobs <= 1 {
        return tasks.iter().map(run_one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| tasks.par_iter().map(run_one).collect())
}
