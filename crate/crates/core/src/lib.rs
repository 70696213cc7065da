pub mod bound;
pub mod error;
pub mod harness;
pub mod plot;
pub mod quantize;
pub mod reconstruct;
pub mod signal;

pub use error::{Error, Result};
