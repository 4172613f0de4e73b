//! Event-driven simulation and analysis of dual-rail return-to-zero adders.

pub mod adders;
pub mod analysis;
pub mod cells;
pub mod data;
pub mod error;
pub mod netlist;
pub mod sim;

pub use error::{Error, Result};
