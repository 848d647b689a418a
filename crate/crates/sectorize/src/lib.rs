pub mod config;
pub mod cost;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod render;
pub mod scenario;
pub mod search;
pub mod subdivision;
pub mod throughput;
pub mod traffic;

pub use error::{Error, Result};
