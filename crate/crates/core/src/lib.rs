//! Conclusive quantum-state transfer through a single spin chain with local memories.

pub mod chain;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod protocol;
pub mod schedule;
pub mod units;

pub use error::{QstError, Result};
