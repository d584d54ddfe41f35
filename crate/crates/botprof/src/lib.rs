//! Std companion to `botprof-core`: corpus file IO, the synthetic-corpus
//! generator, experiment orchestration, and report/table writers.

pub mod error;
pub mod io;
pub mod pipeline;
pub mod synth;

pub use error::AppError;
