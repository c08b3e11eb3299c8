pub mod basis;
pub mod circuit;
pub mod codec;
pub mod config;
pub mod dictionary;
pub mod error;
pub mod lossless;
pub mod metrics;
pub mod numerics;
pub mod pipeline;
pub mod qasm;
pub mod qsd;
pub mod skd;

pub use error::{Error, Result};
