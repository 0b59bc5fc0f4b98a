//! IO companion to `qclab-core`: JSON schemas for schemes, circuits and
//! encodings, and a registry of seeded experiments that re-check every
//! numerically certifiable bound and emit machine-readable reports.

pub mod experiments;
pub mod schema;

pub use experiments::{
    list_experiments, run, validate, BoundCheck, ExperimentConfig, ExperimentReport, RunError,
};
