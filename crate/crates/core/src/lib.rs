pub mod classifier;
pub mod cleaning;
pub mod error;
pub mod export;
pub mod ids;
pub mod ingest;
pub mod refinement;
pub mod schema;
pub mod synth;

pub use error::{Error, Result};
