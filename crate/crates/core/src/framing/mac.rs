//! MAC-lite data unit carried in the PSDU.
//!
//! Layout, big-endian:
//!
//! | bytes | field                                                  |
//! |-------|--------------------------------------------------------|
//! | 0..2  | sequence number                                        |
//! | 2..4  | kind (bits 15..12), reserved (11..10), payload length  |
//! | 4..   | payload (0..=1023 bytes)                               |
//! | last 4| CRC-32 over everything before it                       |

use serde::{Deserialize, Serialize};

use super::FramingError;
use crate::fec::fcs_crc32;

pub const MAX_PAYLOAD: usize = 1023;
pub const MAC_OVERHEAD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FrameKind {
    Chat,
    Stream,
    Probe,
}

impl FrameKind {
    fn code(self) -> u16 {
        match self {
            FrameKind::Chat => 1,
            FrameKind::Stream => 2,
            FrameKind::Probe => 3,
        }
    }

    fn from_code(c: u16) -> Option<Self> {
        match c {
            1 => Some(FrameKind::Chat),
            2 => Some(FrameKind::Stream),
            3 => Some(FrameKind::Probe),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacFrame {
    pub seq: u16,
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl MacFrame {
    pub fn to_bytes(&self) -> Result<Vec<u8>, FramingError> {
        build_mac_frame(self.kind, self.seq, &self.payload)
    }
}

pub fn build_mac_frame(kind: FrameKind, seq: u16, payload: &[u8]) -> Result<Vec<u8>, FramingError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(FramingError::PayloadTooLarge(payload.len()));
    }
    let mut out = Vec::with_capacity(payload.len() + MAC_OVERHEAD);
    out.extend_from_slice(&seq.to_be_bytes());
    out.extend_from_slice(&((kind.code() << 12) | payload.len() as u16).to_be_bytes());
    out.extend_from_slice(payload);
    let crc = fcs_crc32(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

pub fn parse_mac_frame(bytes: &[u8]) -> Result<MacFrame, FramingError> {
    if bytes.len() < MAC_OVERHEAD {
        return Err(FramingError::Short { need: MAC_OVERHEAD, got: bytes.len() });
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let crc = u32::from_be_bytes(tail.try_into().expect("4-byte tail"));
    if fcs_crc32(body) != crc {
        return Err(FramingError::Integrity);
    }
    let seq = u16::from_be_bytes([body[0], body[1]]);
    let word = u16::from_be_bytes([body[2], body[3]]);
    let kind = FrameKind::from_code(word >> 12).ok_or(FramingError::Malformed("unknown frame kind"))?;
    let len = (word & 0x03ff) as usize;
    if len != body.len() - 4 {
        return Err(FramingError::Malformed("length field disagrees with frame size"));
    }
    Ok(MacFrame { seq, kind, payload: body[4..].to_vec() })
}
