//! Channel-aware probabilistic transmission scheduling for vehicular sensor
//! uploads.
//!
//! A vehicle buffers sensor readings and decides every `t_decision` seconds
//! whether to upload the whole buffer, favouring moments of good channel
//! quality. The crate contains:
//!
//! - [`metric`]: the per-metric transmission probability and the
//!   optimistic / pessimistic / weighted-mean combinators,
//! - [`trace`]: channel traces (CSV ingestion and a seeded synthetic
//!   generator with a latent capacity model),
//! - [`predictor`]: data-rate regression (M5-style model tree and linear
//!   baseline) with k-fold cross validation,
//! - [`sim`]: the trace-driven upload simulator and its KPIs,
//! - [`report`]: summary statistics, deadline-miss tables, binned series
//!   and CSV export,
//! - [`config`] and [`cli`]: the JSON experiment config and the
//!   `cat-sched` command line.
//!
//! See the `examples/` directory for one runnable program per capability.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod metric;
pub mod predictor;
pub mod report;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
