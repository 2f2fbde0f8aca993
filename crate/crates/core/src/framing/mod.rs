//! PPDU construction and parsing, plus the MAC-lite unit it carries.

mod mac;
pub mod ppdu;

use thiserror::Error;

pub use self::mac::{build_mac_frame, parse_mac_frame, FrameKind, MacFrame, MAC_OVERHEAD, MAX_PAYLOAD};
pub use self::ppdu::{build_ppdu, preamble_chips, recover_ppdu, Phr, PREAMBLE_CHIPS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FramingError {
    #[error("payload of {0} bytes exceeds the 1023-byte limit")]
    PayloadTooLarge(usize),
    #[error("PSDU of {0} bytes does not fit the 16-bit length field")]
    PsduTooLarge(usize),
    #[error("buffer too short: need {need} bytes, got {got}")]
    Short { need: usize, got: usize },
    #[error("frame check sequence mismatch")]
    Integrity,
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
    #[error("header failure: {0}")]
    Header(&'static str),
    #[error("chip stream truncated: need {need} chips, got {got}")]
    Truncated { need: usize, got: usize },
}
