//! Recovering ordinal preferences (and out-of-sample choice probabilities)
//! from stochastic binary-choice data augmented with response times.
//!
//! The crate has three layers:
//!
//! * data: trial ingestion, empirical step CDFs, and closed-form fixture
//!   datasets ([`data_model`], [`dataset`]);
//! * inference: dominance, percentile, and pivot criteria that turn a
//!   dataset into revealed-preference relations and predictions
//!   ([`unrestricted`], [`symmetric`], [`fechner`], [`relations`]);
//! * models: simulators and constructions for the generating processes the
//!   criteria are validated against ([`generators`], [`rationalize`]).
//!
//! Monte Carlo loops are data-parallel under the default `parallel` feature
//! and fall back to sequential execution without it; outputs are bit-identical
//! either way.

// `!(x > 0.0)` is the NaN-rejecting form of the positivity guards used
// throughout the numeric validation paths
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_model;
pub mod dataset;
pub mod exec;
pub mod fechner;
pub mod generators;
pub mod math;
pub mod rationalize;
pub mod relations;
pub mod report;
pub mod simulate;
pub mod symmetric;
pub mod unrestricted;

pub use data_model::{
    ChoiceDataset, DataError, EmpiricalCdf, LoadOptions, OptionId, PairKey, TrialRecord,
};
pub use dataset::{AnalysisError, AnalyticDataset, Dataset, RtCdf};
pub use relations::{Provenance, Relation, RevelationEdge, Strength};
