//! JSON experiment configuration.
//!
//! Every section may be omitted; omitted values fall back to the reference
//! scenario (1 Hz sensor, 50 kB readings, `t_min ∈ {10, 30}` s,
//! `t_max = 120` s, `t_decision = 1` s) and the built-in metric table.
//!
//! Seeds: synthetic trace `i` of profile `p` uses
//! `base_seed + TRACE_SEED_OFFSET + 1000·p + i`; simulation run `r` uses
//! `base_seed + r`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Indicator, MetricDefinition, TimingConfig};
use crate::predictor::load_model;
use crate::sim::{PolicyConfig, SensorConfig, DEFAULT_DEADLINES};
use crate::trace::{generate_synthetic_trace, read_trace_file, ChannelTrace, ProfileKind, TrackProfile};

pub const TRACE_SEED_OFFSET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub sensor: SensorSection,
    #[serde(default)]
    pub timing: TimingSection,
    #[serde(default = "MetricDefinition::channel_defaults")]
    pub metrics: Vec<MetricDefinition>,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicySpec>,
    #[serde(default)]
    pub trace: TraceSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config")
    }
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default = "default_payload")]
    pub payload_bytes: f64,
}

fn default_frequency() -> f64 {
    1.0
}

fn default_payload() -> f64 {
    50_000.0
}

impl Default for SensorSection {
    fn default() -> Self {
        SensorSection {
            frequency_hz: default_frequency(),
            payload_bytes: default_payload(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    #[serde(default = "default_t_min")]
    pub t_min_s: Vec<f64>,
    #[serde(default = "default_t_max")]
    pub t_max_s: f64,
    #[serde(default = "default_t_decision")]
    pub t_decision_s: f64,
}

fn default_t_min() -> Vec<f64> {
    vec![10.0, 30.0]
}

fn default_t_max() -> f64 {
    120.0
}

fn default_t_decision() -> f64 {
    1.0
}

impl Default for TimingSection {
    fn default() -> Self {
        TimingSection {
            t_min_s: default_t_min(),
            t_max_s: default_t_max(),
            t_decision_s: default_t_decision(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Periodic {
        #[serde(default)]
        name: Option<String>,
    },
    SingleMetric {
        metric: String,
        #[serde(default)]
        name: Option<String>,
    },
    Optimistic {
        #[serde(default)]
        metrics: Option<Vec<String>>,
        #[serde(default)]
        name: Option<String>,
    },
    Pessimistic {
        #[serde(default)]
        metrics: Option<Vec<String>>,
        #[serde(default)]
        name: Option<String>,
    },
    WeightedMean {
        #[serde(default)]
        metrics: Option<Vec<String>>,
        weights: Vec<f64>,
        #[serde(default)]
        name: Option<String>,
    },
    PredictedRate {
        /// Path of a model file written by `train`.
        model: PathBuf,
        #[serde(default = "default_phi_max")]
        phi_max: f64,
        #[serde(default)]
        name: Option<String>,
    },
}

fn default_phi_max() -> f64 {
    18.0
}

fn default_policies() -> Vec<PolicySpec> {
    let mut policies = vec![PolicySpec::Periodic { name: None }];
    policies.extend(Indicator::CHANNEL.iter().map(|i| PolicySpec::SingleMetric {
        metric: i.as_str().into(),
        name: None,
    }));
    policies
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    /// Trace CSV files; when non-empty, synthetic generation is skipped.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub synthetic: SyntheticSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    #[serde(default = "default_profiles")]
    pub profiles: Vec<ProfileKind>,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_sample_period")]
    pub sample_period_s: f64,
    #[serde(default = "default_traces_per_profile")]
    pub traces_per_profile: usize,
}

fn default_profiles() -> Vec<ProfileKind> {
    vec![ProfileKind::Suburban, ProfileKind::Highway]
}

fn default_duration() -> f64 {
    3600.0
}

fn default_sample_period() -> f64 {
    1.0
}

fn default_traces_per_profile() -> usize {
    1
}

impl Default for SyntheticSection {
    fn default() -> Self {
        SyntheticSection {
            profiles: default_profiles(),
            duration_s: default_duration(),
            sample_period_s: default_sample_period(),
            traces_per_profile: default_traces_per_profile(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    #[serde(default = "default_runs")]
    pub runs_per_pair: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_deadlines")]
    pub deadlines_s: Vec<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Start-time indicators for the binned goodput series.
    #[serde(default = "default_indicators")]
    pub binned_indicators: Vec<Indicator>,
}

fn default_runs() -> usize {
    5
}

fn default_seed() -> u64 {
    1
}

fn default_deadlines() -> Vec<f64> {
    DEFAULT_DEADLINES.to_vec()
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_indicators() -> Vec<Indicator> {
    vec![
        Indicator::Rsrp,
        Indicator::Rsrq,
        Indicator::Snr,
        Indicator::Cqi,
        Indicator::Payload,
    ]
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            runs_per_pair: default_runs(),
            base_seed: default_seed(),
            deadlines_s: default_deadlines(),
            out_dir: default_out_dir(),
            binned_indicators: default_indicators(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    pub fn sensor(&self) -> SensorConfig {
        SensorConfig {
            frequency: self.sensor.frequency_hz,
            payload_size: self.sensor.payload_bytes,
        }
    }

    pub fn timings(&self) -> Result<Vec<TimingConfig>> {
        self.timing
            .t_min_s
            .iter()
            .map(|&t_min| {
                TimingConfig::new(t_min, self.timing.t_max_s, self.timing.t_decision_s)
                    .map_err(|e| Error::InvalidConfig(format!("timing: {e}")))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor()
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("sensor: {e}")))?;
        if self.timing.t_min_s.is_empty() {
            return Err(Error::InvalidConfig("timing.t_min_s must not be empty".into()));
        }
        self.timings()?;
        for (i, m) in self.metrics.iter().enumerate() {
            m.validate()
                .map_err(|e| Error::InvalidConfig(format!("metrics[{i}]: {e}")))?;
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("policies must not be empty".into()));
        }
        for (i, spec) in self.policies.iter().enumerate() {
            let names: Vec<&str> = match spec {
                PolicySpec::SingleMetric { metric, .. } => vec![metric.as_str()],
                PolicySpec::Optimistic { metrics, .. }
                | PolicySpec::Pessimistic { metrics, .. }
                | PolicySpec::WeightedMean { metrics, .. } => {
                    metrics.iter().flatten().map(String::as_str).collect()
                }
                _ => vec![],
            };
            for name in names {
                if !self.metrics.iter().any(|m| m.name == name) {
                    return Err(Error::InvalidConfig(format!("policies[{i}]: unknown metric `{name}`")));
                }
            }
            if let PolicySpec::WeightedMean { metrics, weights, .. } = spec {
                let count = metrics.as_ref().map_or(self.metrics.len(), Vec::len);
                crate::metric::validate_weights(weights, count)
                    .map_err(|e| Error::InvalidConfig(format!("policies[{i}]: {e}")))?;
            }
            if let PolicySpec::PredictedRate { phi_max, .. } = spec {
                if !(*phi_max > 0.0) {
                    return Err(Error::InvalidConfig(format!("policies[{i}]: phi_max must be > 0")));
                }
            }
        }
        let eval = &self.evaluation;
        if eval.runs_per_pair == 0 {
            return Err(Error::InvalidConfig("evaluation.runs_per_pair must be >= 1".into()));
        }
        if eval.deadlines_s.is_empty() || eval.deadlines_s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "evaluation.deadlines_s must be non-empty and strictly increasing".into(),
            ));
        }
        let syn = &self.trace.synthetic;
        if self.trace.files.is_empty()
            && (syn.profiles.is_empty() || syn.traces_per_profile == 0 || !(syn.sample_period_s > 0.0))
        {
            return Err(Error::InvalidConfig(
                "trace.synthetic needs profiles, traces_per_profile >= 1 and sample_period_s > 0".into(),
            ));
        }
        Ok(())
    }

    fn lookup(&self, names: &Option<Vec<String>>) -> Vec<MetricDefinition> {
        match names {
            None => self.metrics.clone(),
            Some(names) => names
                .iter()
                .filter_map(|n| self.metrics.iter().find(|m| &m.name == n).cloned())
                .collect(),
        }
    }

    /// Every policy for every configured `t_min`, named `<name>_tmin<t_min>`.
    /// Relative model paths resolve against `base_dir`.
    pub fn build_policies(&self, base_dir: &Path) -> Result<Vec<PolicyConfig>> {
        let mut out = Vec::new();
        for timing in self.timings()? {
            for (i, spec) in self.policies.iter().enumerate() {
                let (policy, name) = match spec {
                    PolicySpec::Periodic { name } => (PolicyConfig::periodic(timing), name),
                    PolicySpec::SingleMetric { metric, name } => {
                        let def = self.lookup(&Some(vec![metric.clone()])).remove(0);
                        (PolicyConfig::single_metric(def, timing), name)
                    }
                    PolicySpec::Optimistic { metrics, name } => {
                        (PolicyConfig::optimistic(self.lookup(metrics), timing), name)
                    }
                    PolicySpec::Pessimistic { metrics, name } => {
                        (PolicyConfig::pessimistic(self.lookup(metrics), timing), name)
                    }
                    PolicySpec::WeightedMean { metrics, weights, name } => (
                        PolicyConfig::weighted_mean(self.lookup(metrics), weights.clone(), timing),
                        name,
                    ),
                    PolicySpec::PredictedRate { model, phi_max, name } => {
                        let path = base_dir.join(model);
                        let model = load_model(&path).map_err(|e| Error::InvalidConfig(format!("policies[{i}]: {e}")))?;
                        (PolicyConfig::predicted_rate(Arc::new(model), *phi_max, timing), name)
                    }
                };
                let base = name.clone().unwrap_or_else(|| policy.name.clone());
                let policy = policy.with_name(format!("{base}_tmin{}", timing.t_min));
                policy
                    .validate()
                    .map_err(|e| Error::InvalidConfig(format!("policies[{i}]: {e}")))?;
                out.push(policy);
            }
        }
        Ok(out)
    }

    pub fn build_traces(&self, base_dir: &Path) -> Result<Vec<ChannelTrace>> {
        if !self.trace.files.is_empty() {
            return self
                .trace
                .files
                .iter()
                .map(|f| read_trace_file(base_dir.join(f)))
                .collect();
        }
        let syn = &self.trace.synthetic;
        let mut traces = Vec::new();
        for (p, &kind) in syn.profiles.iter().enumerate() {
            let profile = TrackProfile::from_kind(kind);
            for i in 0..syn.traces_per_profile {
                let seed = self
                    .evaluation
                    .base_seed
                    .wrapping_add(TRACE_SEED_OFFSET + 1000 * p as u64 + i as u64);
                let trace = generate_synthetic_trace(&profile, syn.duration_s, syn.sample_period_s, seed)?;
                traces.push(trace.with_name(format!("{}{i}", kind.as_str())));
            }
        }
        Ok(traces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_scenario() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c.sensor.frequency_hz, 1.0);
        assert_eq!(c.sensor.payload_bytes, 50_000.0);
        assert_eq!(c.timing.t_min_s, vec![10.0, 30.0]);
        assert_eq!(c.timing.t_max_s, 120.0);
        assert_eq!(c.timing.t_decision_s, 1.0);
        assert_eq!(c.metrics, MetricDefinition::channel_defaults());
        assert_eq!(c.evaluation.deadlines_s, vec![30.0, 60.0, 120.0, 180.0]);
        let sections = ExperimentConfig::from_json(
            r#"{"sensor":{},"timing":{},"trace":{},"evaluation":{}}"#,
        )
        .unwrap();
        assert_eq!(sections, c);
    }

    #[test]
    fn expands_policies_per_t_min() {
        let c = ExperimentConfig::default();
        let policies = c.build_policies(Path::new(".")).unwrap();
        assert_eq!(policies.len(), 10);
        assert_eq!(policies[0].name, "periodic_tmin10");
        assert_eq!(policies[9].name, "cqi_tmin30");
    }

    #[test]
    fn unknown_policy_kind_is_named() {
        let err = ExperimentConfig::from_json(r#"{"policies":[{"kind":"telepathic"}]}"#).unwrap_err();
        assert!(err.to_string().contains("telepathic"), "{err}");
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::from_json(r#"{"policies":[{"kind":"single_metric","metric":"rssi"}]}"#).unwrap_err();
        assert!(err.to_string().contains("policies[0]") && err.to_string().contains("rssi"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"timing":{"t_min_s":[130]}}"#).unwrap_err();
        assert!(err.to_string().contains("timing"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"sensor":{"frequency_hz":0}}"#).unwrap_err();
        assert!(err.to_string().contains("sensor"), "{err}");
        let err = ExperimentConfig::from_json(
            r#"{"policies":[{"kind":"weighted_mean","weights":[1,1]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights"), "{err}");
    }
}
