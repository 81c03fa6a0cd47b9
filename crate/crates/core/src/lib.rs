pub mod analysis;
pub mod defaults;
pub mod error;
pub mod impute;
pub mod index;
pub mod ingest;
pub mod model;
pub mod numfmt;
pub mod payload;
pub mod snapshot;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use model::*;
