//! Forward error correction: RS(15, k) over GF(16), the K=7 convolutional
//! code, and the CRCs guarding header and payload.

pub mod conv;
pub mod crc;
pub mod gf16;
pub mod rs;

use thiserror::Error;

pub use self::conv::{conv_encode, viterbi_decode, ConvCode};
pub use self::crc::{fcs_crc32, hcs_crc16};
pub use self::gf16::{gf16_mul, Gf16};
pub use self::rs::{RsCode, RsDecoded};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FecError {
    #[error("length mismatch: expected {expected}, got {got}")]
    Size { expected: usize, got: usize },
    #[error("too many symbol errors to correct")]
    Uncorrectable,
    #[error("unsupported code {0}")]
    InvalidCode(String),
}

pub fn rs_encode(msg: &[Gf16], code: &RsCode) -> Result<[Gf16; 15], FecError> {
    code.encode(msg)
}

pub fn rs_decode(word: &[Gf16], code: &RsCode) -> Result<RsDecoded, FecError> {
    code.decode(word)
}
