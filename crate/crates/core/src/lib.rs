//! High-dimensional one-sample location tests.
//!
//! The crate provides the signed-rank (SR), spatial-sign (SS), mean-based (CQ)
//! and classical signed-rank (TSR) statistics, seeded generators for elliptical
//! and factor-model scenarios, asymptotic power and relative-efficiency
//! calculations, and a replication harness for empirical size and power
//! tables.

pub mod analysis;
pub mod core_math;
pub mod error;
pub mod rng;
pub mod samplers;
pub mod simharness;
pub mod stat_tests;

pub use core_math::{Matrix, SampleMatrix, ScatterSpec};
pub use error::{Error, Result};
pub use samplers::{Allocation, MeanSpec, NoiseKind, ScenarioSpec};
pub use stat_tests::{TestKind, TestResult, TraceMode};

/// Master seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 12345;
