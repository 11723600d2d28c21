//! Simulation laboratory for partial sums of heavy-tailed functionals of
//! long-range dependent Gaussian sequences.

pub mod chaos;
pub mod error;
pub mod experiments;
pub mod tails;
pub mod limit_processes;
pub mod lrd_source;
pub mod quad;
pub mod regimes;
pub mod stats;
pub mod svg;
pub mod rng;

pub use error::{LrdError, Result};
