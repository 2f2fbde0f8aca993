//! Simulated optical medium: link budget, photodetection and the sample
//! transports that replace the conversion hardware.

pub mod medium;
mod optics;
mod propagate;
pub mod scenario;

use thiserror::Error;

pub use self::optics::{electrical_snr, lambert_order, los_gain, ChannelParams};
pub use self::propagate::{derive_seed, propagate, Propagator};
pub use self::scenario::Scenario;
pub use crate::stats::LinkStats;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel configuration: {0}")]
    Config(String),
    #[error("scenario line {line}: {reason}")]
    Scenario { line: usize, reason: String },
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    #[error("malformed sample stream: {0}")]
    Format(String),
}
