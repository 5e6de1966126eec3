pub mod error;
pub mod exec;
pub mod graph;
pub use error::{Error, Result};
