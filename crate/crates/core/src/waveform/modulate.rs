use serde::{Deserialize, Serialize};

use super::WaveformError;
use crate::phy_modes::Family;

/// A block of normalized optical intensity samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntensitySamples {
    pub sample_rate_hz: u32,
    pub samples: Vec<f32>,
}

impl IntensitySamples {
    pub fn new(sample_rate_hz: u32, samples: Vec<f32>) -> Self {
        IntensitySamples { sample_rate_hz, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// LED drive levels for chip 0 and chip 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub lo: f32,
    pub hi: f32,
}

impl Default for Levels {
    fn default() -> Self {
        Levels { lo: 0.0, hi: 1.0 }
    }
}

impl Levels {
    pub fn new(lo: f32, hi: f32) -> Result<Self, WaveformError> {
        let l = Levels { lo, hi };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), WaveformError> {
        if !(0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0) {
            return Err(WaveformError::Config(format!(
                "drive levels must satisfy 0 <= lo < hi <= 1, got lo={} hi={}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

pub fn sample_rate(family: Family, sps: usize) -> u32 {
    family.optical_clock_hz() * sps as u32
}

fn check_sps(sps: usize, family: Family) -> Result<(), WaveformError> {
    if sps < 2 {
        return Err(WaveformError::Config(format!("samples per chip must be >= 2, got {sps}")));
    }
    if family == Family::Vppm && !sps.is_multiple_of(2) {
        return Err(WaveformError::Config(format!("VPPM needs an even samples-per-chip, got {sps}")));
    }
    Ok(())
}

/// Rectangular OOK: each chip becomes `sps` samples at `lo` or `hi`.
pub fn modulate_ook(chips: &[u8], sps: usize, levels: Levels) -> Result<IntensitySamples, WaveformError> {
    check_sps(sps, Family::Ook)?;
    levels.validate()?;
    let mut out = Vec::with_capacity(chips.len() * sps);
    for &c in chips {
        let v = if c == 1 { levels.hi } else { levels.lo };
        out.extend(std::iter::repeat_n(v, sps));
    }
    Ok(IntensitySamples::new(sample_rate(Family::Ook, sps), out))
}

/// 50 % duty VPPM: bit 0 is high-then-low, bit 1 is low-then-high.
pub fn modulate_vppm(bits: &[u8], sps: usize, levels: Levels) -> Result<IntensitySamples, WaveformError> {
    check_sps(sps, Family::Vppm)?;
    levels.validate()?;
    let half = sps / 2;
    let mut out = Vec::with_capacity(bits.len() * sps);
    for &b in bits {
        let (first, second) = if b == 1 { (levels.lo, levels.hi) } else { (levels.hi, levels.lo) };
        out.extend(std::iter::repeat_n(first, half));
        out.extend(std::iter::repeat_n(second, half));
    }
    Ok(IntensitySamples::new(sample_rate(Family::Vppm, sps), out))
}

pub fn modulate(chips: &[u8], family: Family, sps: usize, levels: Levels) -> Result<IntensitySamples, WaveformError> {
    match family {
        Family::Ook => modulate_ook(chips, sps, levels),
        Family::Vppm => modulate_vppm(chips, sps, levels),
    }
}

/// Per-chip level pattern (+1 high, -1 low) in half-chip units.
pub(crate) fn half_chip_levels(chips: &[u8], family: Family) -> Vec<i8> {
    chips
        .iter()
        .flat_map(|&c| match (family, c) {
            (Family::Ook, 1) => [1, 1],
            (Family::Ook, _) => [-1, -1],
            (Family::Vppm, 1) => [-1, 1],
            (Family::Vppm, _) => [1, -1],
        })
        .collect()
}
