pub mod analytics;
pub mod cipher;
pub mod cli;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod qkd;
pub mod rng;
pub mod sim;
pub mod walk;

pub use error::{Error, Result};
