//! Chip-to-sample modulation, preamble synchronization and demodulation.

mod demod;
mod modulate;
pub mod sync;

use thiserror::Error;

use crate::framing::FramingError;

pub use self::demod::{demodulate, demodulate_frame, estimate_levels, soft_chips, LevelEstimate};
pub use self::modulate::{modulate, modulate_ook, modulate_vppm, sample_rate, IntensitySamples, Levels};
pub use self::sync::{synchronize, Correlator, Detection, PreambleTemplate, SearchOutcome, DEFAULT_THRESHOLD};

/// Samples per chip used when nothing else is configured.
pub const DEFAULT_SPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveformError {
    #[error("invalid waveform configuration: {0}")]
    Config(String),
    #[error("sample stream truncated: need {need} samples, got {got}")]
    Truncated { need: usize, got: usize },
    #[error(transparent)]
    Header(FramingError),
}
