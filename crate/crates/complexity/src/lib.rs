//! Multidimensional economic complexity toolkit: specialization matrices
//! from country-by-activity output data, complexity metrics (ECI/PCI,
//! fitness, concentration measures), a similarity-based instrument, and
//! panel regressions with model selection.

pub mod econ;
pub mod error;
pub mod ingest;
pub mod instrument;
pub mod metrics;
pub mod pipeline;
pub mod specialization;

pub use error::{Error, Result};
