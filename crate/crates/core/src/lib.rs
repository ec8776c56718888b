//! Physics-derived thermal state-space models of building walls, subspace
//! alignment against measured data, and forecasting beyond the training
//! window.

pub mod align;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod rom;
pub mod sim;
pub mod thermal;

pub use error::{Error, Result};
