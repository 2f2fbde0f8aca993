//! Bit-exact sample stream format.
//!
//! Header: magic `SLNC`, version byte 1, sample rate as u32 little-endian.
//! Payload: f32 little-endian samples. A UDP datagram is a u32
//! little-endian sequence number followed by a header and its payload.

use super::super::ChannelError;

pub const MAGIC: &[u8; 4] = b"SLNC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 9;

pub fn encode_header(sample_rate_hz: u32) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(MAGIC);
    h[4] = VERSION;
    h[5..].copy_from_slice(&sample_rate_hz.to_le_bytes());
    h
}

pub fn decode_header(b: &[u8]) -> Result<u32, ChannelError> {
    if b.len() < HEADER_LEN {
        return Err(ChannelError::Format(format!("header needs {HEADER_LEN} bytes, got {}", b.len())));
    }
    if &b[..4] != MAGIC {
        return Err(ChannelError::Format("bad magic".into()));
    }
    if b[4] != VERSION {
        return Err(ChannelError::Format(format!("unsupported version {}", b[4])));
    }
    Ok(u32::from_le_bytes(b[5..9].try_into().unwrap()))
}

pub fn encode_samples(samples: &[f32], out: &mut Vec<u8>) {
    out.reserve(samples.len() * 4);
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
}

pub fn decode_samples(b: &[u8]) -> Result<Vec<f32>, ChannelError> {
    if !b.len().is_multiple_of(4) {
        return Err(ChannelError::Format(format!("payload of {} bytes is not whole samples", b.len())));
    }
    Ok(b.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn encode_chunk(seq: u32, sample_rate_hz: u32, samples: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + HEADER_LEN + 4 * samples.len());
    out.extend_from_slice(&seq.to_le_bytes());
    out.extend_from_slice(&encode_header(sample_rate_hz));
    encode_samples(samples, &mut out);
    out
}

/// Returns (sequence number, sample rate, samples).
pub fn decode_chunk(b: &[u8]) -> Result<(u32, u32, Vec<f32>), ChannelError> {
    if b.len() < 4 + HEADER_LEN {
        return Err(ChannelError::Format(format!("datagram of {} bytes is too short", b.len())));
    }
    let seq = u32::from_le_bytes(b[..4].try_into().unwrap());
    let rate = decode_header(&b[4..])?;
    Ok((seq, rate, decode_samples(&b[4 + HEADER_LEN..])?))
}
