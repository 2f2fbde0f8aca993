//! On-air frame: preamble, PHY header and PSDU, as a chip sequence.
//!
//! The PHY header (mcs_id u8, psdu_len u16, hcs u16) is always coded with the
//! lowest-rate mode of its clock family; the PSDU uses the mode named by
//! mcs_id. Each section is coded independently: bytes are split into nibbles,
//! padded with zero nibbles to whole RS blocks, RS-encoded, expanded to bits
//! MSB first, convolutionally encoded with its own tail, then line coded.

use super::FramingError;
use crate::fec::rs::{bytes_to_nibbles, nibbles_to_bytes};
use crate::fec::{hcs_crc16, ConvCode, Gf16, RsCode};
use crate::line_codes::{self, Manchester};
use crate::phy_modes::{mode_by_id, Family, PhyMode, Rll};

/// Alternating fast-lock chips at the start of every preamble.
pub const LOCK_CHIPS: usize = 64;
/// Family marker words following the lock pattern, sent MSB first. Both were
/// picked by random search over balanced 32-chip words for the lowest peak
/// sidelobe of the whole preamble's normalized correlation (about 0.63).
pub const OOK_MARKER: u32 = 0x526c_73f0;
pub const VPPM_MARKER: u32 = 0x4fc7_b920;
pub const PREAMBLE_CHIPS: usize = LOCK_CHIPS + 32;

pub const PHR_BYTES: usize = 5;

pub fn preamble_chips(family: Family) -> Vec<u8> {
    let marker = match family {
        Family::Ook => OOK_MARKER,
        Family::Vppm => VPPM_MARKER,
    };
    let mut chips: Vec<u8> = (0..LOCK_CHIPS).map(|i| (i % 2 == 0) as u8).collect();
    chips.extend((0..32).rev().map(|s| ((marker >> s) & 1) as u8));
    chips
}

/// Decoded PHY header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phr {
    pub mcs_id: u8,
    pub psdu_len: u16,
}

impl Phr {
    pub fn to_bytes(self) -> [u8; PHR_BYTES] {
        let [l0, l1] = self.psdu_len.to_be_bytes();
        let hcs = hcs_crc16(&[self.mcs_id, l0, l1]).to_be_bytes();
        [self.mcs_id, l0, l1, hcs[0], hcs[1]]
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, FramingError> {
        if b.len() != PHR_BYTES {
            return Err(FramingError::Header("wrong header length"));
        }
        if hcs_crc16(&b[..3]).to_be_bytes() != [b[3], b[4]] {
            return Err(FramingError::Header("HCS mismatch"));
        }
        Ok(Phr { mcs_id: b[0], psdu_len: u16::from_be_bytes([b[1], b[2]]) })
    }
}

/// Number of coded bits (after RS and CC) for a section of `len` bytes.
fn coded_bits(mode: &PhyMode, len: usize) -> usize {
    if len == 0 {
        return 0;
    }
    let bits = match mode.rs {
        Some(rs) => (2 * len).div_ceil(rs.k) * rs.n * 4,
        None => 8 * len,
    };
    match mode.cc_rate {
        Some(rate) => ConvCode::new(rate).encoded_len(bits),
        None => bits,
    }
}

/// Chips occupied by a section of `len` bytes coded with `mode`.
pub fn section_chips(mode: &PhyMode, len: usize) -> usize {
    let bits = coded_bits(mode, len);
    match mode.rll {
        Rll::Manchester => 2 * bits,
        Rll::FourBSixB => bits.div_ceil(4) * 6,
    }
}

pub fn phr_chips(family: Family) -> usize {
    section_chips(family.header_mode(), PHR_BYTES)
}

/// Total PPDU length in chips, preamble included.
pub fn ppdu_chips(mode: &PhyMode, psdu_len: usize) -> usize {
    PREAMBLE_CHIPS + phr_chips(mode.family()) + section_chips(mode, psdu_len)
}

fn to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |s| (b >> s) & 1)).collect()
}

fn from_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8).map(|c| c.iter().fold(0u8, |a, &b| (a << 1) | b)).collect()
}

fn rs_code(mode: &PhyMode) -> Option<RsCode> {
    mode.rs.map(|p| RsCode::new(p.k).expect("mode table holds valid RS codes"))
}

/// FEC and line coding for one section.
pub fn encode_section(bytes: &[u8], mode: &PhyMode, manchester: Manchester) -> Vec<u8> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let mut bits = match rs_code(mode) {
        Some(code) => {
            let mut nibbles = bytes_to_nibbles(bytes);
            nibbles.resize(nibbles.len().div_ceil(code.k()) * code.k(), Gf16::ZERO);
            nibbles
                .chunks_exact(code.k())
                .flat_map(|m| code.encode(m).expect("block sized to k"))
                .flat_map(|s| (0..4).rev().map(move |i| (s.value() >> i) & 1))
                .collect()
        }
        None => to_bits(bytes),
    };
    if let Some(rate) = mode.cc_rate {
        bits = ConvCode::new(rate).encode(&bits);
    }
    match mode.rll {
        Rll::Manchester => manchester.encode(&bits),
        Rll::FourBSixB => {
            bits.resize(bits.len().div_ceil(4) * 4, 0);
            line_codes::fourb6b_encode(&bits).expect("padded to whole nibbles")
        }
    }
}

/// Outcome of decoding one section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDecode {
    pub bytes: Vec<u8>,
    /// At least one RS block was beyond correction; `bytes` then carries the
    /// uncorrected systematic symbols for that block.
    pub fec_failed: bool,
    pub corrected_symbols: usize,
}

/// Inverse of [`encode_section`] from soft chip values (positive means the
/// chip was high). Line-code decisions are codeword constrained, so chip
/// errors reach the FEC instead of aborting the frame.
pub fn decode_section(soft: &[f32], mode: &PhyMode, len: usize, manchester: Manchester) -> SectionDecode {
    if len == 0 {
        return SectionDecode { bytes: Vec::new(), fec_failed: false, corrected_symbols: 0 };
    }
    let coded = coded_bits(mode, len);
    let mut bits = match mode.rll {
        Rll::Manchester => line_codes::manchester_decide_soft(manchester.inverted, soft),
        Rll::FourBSixB => line_codes::fourb6b_decide_soft(soft),
    };
    bits.truncate(coded);
    if let Some(rate) = mode.cc_rate {
        bits = ConvCode::new(rate).decode(&bits).expect("length derived from the same mode");
    }
    match rs_code(mode) {
        Some(code) => {
            let mut fec_failed = false;
            let mut corrected = 0;
            let mut nibbles = Vec::with_capacity(bits.len() / 60 * code.k());
            for block in bits.chunks_exact(60) {
                let word: Vec<Gf16> =
                    block.chunks_exact(4).map(|s| Gf16::new(s.iter().fold(0, |a, &b| (a << 1) | b))).collect();
                match code.decode(&word) {
                    Ok(d) => {
                        corrected += d.corrected;
                        nibbles.extend(d.message);
                    }
                    Err(_) => {
                        fec_failed = true;
                        nibbles.extend_from_slice(&word[..code.k()]);
                    }
                }
            }
            nibbles.truncate(2 * len);
            SectionDecode { bytes: nibbles_to_bytes(&nibbles), fec_failed, corrected_symbols: corrected }
        }
        None => {
            bits.truncate(8 * len);
            SectionDecode { bytes: from_bits(&bits), fec_failed: false, corrected_symbols: 0 }
        }
    }
}

/// Preamble, header and PSDU chips for `frame_bytes` sent with `mode`.
pub fn build_ppdu(frame_bytes: &[u8], mode: &PhyMode) -> Result<Vec<u8>, FramingError> {
    build_ppdu_with(frame_bytes, mode, Manchester::default())
}

pub fn build_ppdu_with(frame_bytes: &[u8], mode: &PhyMode, manchester: Manchester) -> Result<Vec<u8>, FramingError> {
    let psdu_len = u16::try_from(frame_bytes.len()).map_err(|_| FramingError::PsduTooLarge(frame_bytes.len()))?;
    let family = mode.family();
    let phr = Phr { mcs_id: mode.id, psdu_len };
    let mut chips = preamble_chips(family);
    chips.extend(encode_section(&phr.to_bytes(), family.header_mode(), manchester));
    chips.extend(encode_section(frame_bytes, mode, manchester));
    Ok(chips)
}

/// Decodes and validates a PHY header from the soft chips that follow the
/// preamble. Returns the header and the PSDU mode it names.
pub fn decode_phr(soft: &[f32], family: Family, manchester: Manchester) -> Result<(Phr, &'static PhyMode), FramingError> {
    let n = phr_chips(family);
    if soft.len() < n {
        return Err(FramingError::Truncated { need: n, got: soft.len() });
    }
    let dec = decode_section(&soft[..n], family.header_mode(), PHR_BYTES, manchester);
    if dec.fec_failed {
        return Err(FramingError::Header("header beyond FEC correction"));
    }
    let phr = Phr::from_bytes(&dec.bytes)?;
    let mode = mode_by_id(phr.mcs_id as u32).map_err(|_| FramingError::Header("unknown mcs_id"))?;
    if mode.family() != family {
        return Err(FramingError::Header("mcs_id from another clock family"));
    }
    Ok((phr, mode))
}

/// Recovered PSDU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovered {
    pub mcs_id: u8,
    pub psdu: Vec<u8>,
    pub fec_failed: bool,
}

/// Decodes header then PSDU from soft chips starting right after the preamble.
pub fn recover_ppdu_soft(soft: &[f32], family: Family, manchester: Manchester) -> Result<Recovered, FramingError> {
    let (phr, mode) = decode_phr(soft, family, manchester)?;
    let start = phr_chips(family);
    let n = section_chips(mode, phr.psdu_len as usize);
    if soft.len() < start + n {
        return Err(FramingError::Truncated { need: start + n, got: soft.len() });
    }
    let dec = decode_section(&soft[start..start + n], mode, phr.psdu_len as usize, manchester);
    Ok(Recovered { mcs_id: phr.mcs_id, psdu: dec.bytes, fec_failed: dec.fec_failed })
}

/// Hard-chip form: `chips` begins at the post-preamble boundary.
pub fn recover_ppdu(chips: &[u8], family: Family) -> Result<(u8, Vec<u8>), FramingError> {
    let soft: Vec<f32> = chips.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect();
    let r = recover_ppdu_soft(&soft, family, Manchester::default())?;
    Ok((r.mcs_id, r.psdu))
}
