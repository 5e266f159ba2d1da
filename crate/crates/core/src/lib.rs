pub mod cli;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod pipeline;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
