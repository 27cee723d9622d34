//! Benchmark harness for generalized lazy search on 2D roadmaps.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod report;

pub use error::BenchError;
