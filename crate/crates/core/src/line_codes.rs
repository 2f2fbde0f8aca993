//! Run-length-limited line codes: Manchester for OOK, 4B6B for VPPM.
//!
//! Bits and chips are `u8` values holding 0 or 1. A chip of 1 drives the LED
//! at its high level.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineCodeError {
    #[error("odd chip count {0} for Manchester decode")]
    OddLength(usize),
    #[error("invalid Manchester pair at index {0}")]
    InvalidPair(usize),
    #[error("bit count {0} is not a multiple of 4")]
    NibbleFraming(usize),
    #[error("chip count {0} is not a multiple of 6")]
    SextetFraming(usize),
    #[error("invalid 4B6B codeword at index {0}")]
    InvalidCodeword(usize),
}

/// Manchester polarity. `Standard` maps 0 to (0,1) and 1 to (1,0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Manchester {
    pub inverted: bool,
}

impl Manchester {
    pub fn encode(self, bits: &[u8]) -> Vec<u8> {
        let mut chips = Vec::with_capacity(bits.len() * 2);
        for &b in bits {
            let first = (b & 1) ^ self.inverted as u8;
            chips.push(first);
            chips.push(first ^ 1);
        }
        chips
    }

    pub fn decode(self, chips: &[u8]) -> Result<Vec<u8>, LineCodeError> {
        if !chips.len().is_multiple_of(2) {
            return Err(LineCodeError::OddLength(chips.len()));
        }
        chips
            .chunks_exact(2)
            .enumerate()
            .map(|(i, pair)| match (pair[0], pair[1]) {
                (1, 0) | (0, 1) => Ok(pair[0] ^ self.inverted as u8),
                _ => Err(LineCodeError::InvalidPair(i)),
            })
            .collect()
    }
}

pub fn manchester_encode(bits: &[u8]) -> Vec<u8> {
    Manchester::default().encode(bits)
}

pub fn manchester_decode(chips: &[u8]) -> Result<Vec<u8>, LineCodeError> {
    Manchester::default().decode(chips)
}

/// 4B6B codewords indexed by nibble value, transcribed from the IEEE 802.15.7
/// PHY I VPPM line-code table. First chip is the most significant bit.
pub const FOURB6B_TABLE: [u8; 16] = [
    0b001110, 0b001101, 0b010011, 0b010110, 0b010101, 0b100011, 0b100110, 0b100101,
    0b011001, 0b011010, 0b011100, 0b110001, 0b110010, 0b101001, 0b101010, 0b101100,
];

const INVALID: u8 = 0xff;

const fn build_inverse() -> [u8; 64] {
    let mut inv = [INVALID; 64];
    let mut i = 0;
    while i < 16 {
        inv[FOURB6B_TABLE[i] as usize] = i as u8;
        i += 1;
    }
    inv
}

static FOURB6B_INVERSE: [u8; 64] = build_inverse();

pub fn fourb6b_encode(bits: &[u8]) -> Result<Vec<u8>, LineCodeError> {
    if !bits.len().is_multiple_of(4) {
        return Err(LineCodeError::NibbleFraming(bits.len()));
    }
    let mut chips = Vec::with_capacity(bits.len() / 4 * 6);
    for nib in bits.chunks_exact(4) {
        let v = nib.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let cw = FOURB6B_TABLE[v];
        chips.extend((0..6).rev().map(|s| (cw >> s) & 1));
    }
    Ok(chips)
}

pub fn fourb6b_decode(chips: &[u8]) -> Result<Vec<u8>, LineCodeError> {
    if !chips.len().is_multiple_of(6) {
        return Err(LineCodeError::SextetFraming(chips.len()));
    }
    let mut bits = Vec::with_capacity(chips.len() / 6 * 4);
    for (i, sextet) in chips.chunks_exact(6).enumerate() {
        let w = sextet.iter().fold(0usize, |acc, &c| (acc << 1) | (c & 1) as usize);
        let v = FOURB6B_INVERSE[w];
        if v == INVALID {
            return Err(LineCodeError::InvalidCodeword(i));
        }
        bits.extend((0..4).rev().map(|s| (v >> s) & 1));
    }
    Ok(bits)
}

/// Maximum-likelihood Manchester decisions from soft chip values
/// (larger means brighter). Always yields a valid bit per pair.
pub(crate) fn manchester_decide_soft(inverted: bool, soft: &[f32]) -> Vec<u8> {
    soft.chunks_exact(2)
        .map(|p| (p[0] > p[1]) as u8 ^ inverted as u8)
        .collect()
}

/// Maximum-correlation 4B6B decisions from soft chip values centred on zero.
pub(crate) fn fourb6b_decide_soft(soft: &[f32]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(soft.len() / 6 * 4);
    for sextet in soft.chunks_exact(6) {
        let mut best = (f32::NEG_INFINITY, 0u8);
        for (nib, &cw) in FOURB6B_TABLE.iter().enumerate() {
            let score: f32 = (0..6)
                .map(|i| if (cw >> (5 - i)) & 1 == 1 { sextet[i] } else { -sextet[i] })
                .sum();
            if score > best.0 {
                best = (score, nib as u8);
            }
        }
        bits.extend((0..4).rev().map(|s| (best.1 >> s) & 1));
    }
    bits
}
