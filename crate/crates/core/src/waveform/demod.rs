//! Integrate-and-dump chip recovery.

use super::WaveformError;
use crate::framing::ppdu::{decode_phr, phr_chips, section_chips};
use crate::framing::{preamble_chips, PREAMBLE_CHIPS};
use crate::line_codes::Manchester;
use crate::phy_modes::{Family, PhyMode};

/// Received levels estimated from the preamble pilots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEstimate {
    pub lo: f64,
    pub hi: f64,
}

impl LevelEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn mean(x: &[f32]) -> f64 {
    x.iter().map(|&v| v as f64).sum::<f64>() / x.len() as f64
}

/// Averages the samples under known high and low preamble chips. `start` is
/// the first preamble sample.
pub fn estimate_levels(samples: &[f32], start: usize, family: Family, sps: usize) -> LevelEstimate {
    let half = sps / 2;
    let (mut hi, mut lo, mut nh, mut nl) = (0.0, 0.0, 0usize, 0usize);
    for (i, &c) in preamble_chips(family).iter().enumerate() {
        let base = start + i * sps;
        let (first, second) = (&samples[base..base + half], &samples[base + half..base + sps]);
        let (a, b) = match (family, c) {
            (Family::Ook, 1) => (Some(first), Some(second)),
            (Family::Ook, _) => (None, None),
            (Family::Vppm, 1) => (Some(second), None),
            (Family::Vppm, _) => (Some(first), None),
        };
        for part in [a, b].into_iter().flatten() {
            hi += mean(part);
            nh += 1;
        }
        let lows: [Option<&[f32]>; 2] = match (family, c) {
            (Family::Ook, 0) => [Some(first), Some(second)],
            (Family::Vppm, 1) => [Some(first), None],
            (Family::Vppm, _) => [Some(second), None],
            _ => [None, None],
        };
        for part in lows.into_iter().flatten() {
            lo += mean(part);
            nl += 1;
        }
    }
    LevelEstimate { lo: lo / nl as f64, hi: hi / nh as f64 }
}

/// Soft chip values for `n_chips` chips starting at `offset`, positive when
/// the chip reads high. OOK compares each chip mean against the estimated
/// midpoint; VPPM compares the two half-chip means.
pub fn soft_chips(
    samples: &[f32],
    offset: usize,
    n_chips: usize,
    family: Family,
    sps: usize,
    levels: LevelEstimate,
) -> Result<Vec<f32>, WaveformError> {
    let need = offset + n_chips * sps;
    if samples.len() < need {
        return Err(WaveformError::Truncated { need, got: samples.len() });
    }
    let half = sps / 2;
    let mid = levels.midpoint();
    Ok(samples[offset..need]
        .chunks_exact(sps)
        .map(|chip| match family {
            Family::Ook => (mean(chip) - mid) as f32,
            Family::Vppm => (mean(&chip[half..]) - mean(&chip[..half])) as f32,
        })
        .collect())
}

fn levels_for(samples: &[f32], offset: usize, family: Family, sps: usize) -> LevelEstimate {
    let p = PREAMBLE_CHIPS * sps;
    if offset >= p {
        estimate_levels(samples, offset - p, family, sps)
    } else {
        let (lo, hi) = samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x as f64), b.max(x as f64)));
        LevelEstimate { lo, hi }
    }
}

/// Hard chip decisions for `n_chips` chips after `offset` (the first
/// post-preamble sample, as reported by synchronization).
pub fn demodulate(
    samples: &[f32],
    offset: usize,
    mode: &PhyMode,
    sps: usize,
    n_chips: usize,
) -> Result<Vec<u8>, WaveformError> {
    let family = mode.family();
    let levels = levels_for(samples, offset, family, sps);
    Ok(soft_chips(samples, offset, n_chips, family, sps, levels)?
        .into_iter()
        .map(|v| (v > 0.0) as u8)
        .collect())
}

/// Demodulates a whole frame: reads the header to learn the PSDU length,
/// then returns header and PSDU chips.
pub fn demodulate_frame(samples: &[f32], offset: usize, family: Family, sps: usize) -> Result<Vec<u8>, WaveformError> {
    let levels = levels_for(samples, offset, family, sps);
    let hdr = phr_chips(family);
    let soft = soft_chips(samples, offset, hdr, family, sps, levels)?;
    let (phr, mode) = decode_phr(&soft, family, Manchester::default()).map_err(WaveformError::Header)?;
    let total = hdr + section_chips(mode, phr.psdu_len as usize);
    Ok(soft_chips(samples, offset, total, family, sps, levels)?
        .into_iter()
        .map(|v| (v > 0.0) as u8)
        .collect())
}
