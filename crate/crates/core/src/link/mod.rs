//! Transmit and receive pipelines, the virtual-time simulator and the
//! threaded engine.

pub mod config;
pub mod engine;
mod rx;
pub mod sim;
mod tx;

use thiserror::Error;

pub use self::config::{LinkConfig, Role};
pub use self::engine::{Delivered, Engine, EngineOptions, Pacing};
pub use self::rx::{Receiver, RxEvent};
pub use self::sim::{run_link, run_per_scan, ScanRow, Simulation};
pub use self::tx::{airtime_s, Transmitter, GAP_CHIPS};

use crate::channel::ChannelError;
use crate::framing::FramingError;
use crate::phy_modes::UnknownMode;
use crate::waveform::WaveformError;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mode(#[from] UnknownMode),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error("transmit queue full ({0} frames)")]
    Backpressure(usize),
    #[error("engine has stopped")]
    Stopped,
    #[error("operation needs the {0} role")]
    Role(&'static str),
}
