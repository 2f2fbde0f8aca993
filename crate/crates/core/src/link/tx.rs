use crate::framing::ppdu::ppdu_chips;
use crate::framing::ppdu::build_ppdu_with;
use crate::framing::{FramingError, MacFrame};
use crate::line_codes::Manchester;
use crate::phy_modes::PhyMode;
use crate::waveform::{modulate, IntensitySamples, Levels, WaveformError};

/// Idle chips appended after every PPDU.
pub const GAP_CHIPS: usize = 16;

/// Air time of one burst carrying a PSDU of `psdu_len` bytes.
pub fn airtime_s(mode: &PhyMode, psdu_len: usize) -> f64 {
    (ppdu_chips(mode, psdu_len) + GAP_CHIPS) as f64 / mode.optical_clock_hz as f64
}

/// Turns MAC frames into intensity bursts for one PHY mode.
#[derive(Debug, Clone, Copy)]
pub struct Transmitter {
    pub mode: &'static PhyMode,
    pub sps: usize,
    pub levels: Levels,
    pub manchester: Manchester,
}

impl Transmitter {
    pub fn new(mode: &'static PhyMode, sps: usize, levels: Levels) -> Result<Self, WaveformError> {
        levels.validate()?;
        // modulate once to surface an unusable sps now rather than per frame
        modulate(&[], mode.family(), sps, levels)?;
        Ok(Transmitter { mode, sps, levels, manchester: Manchester::default() })
    }

    /// PPDU samples followed by the idle gap at the low level.
    pub fn burst_psdu(&self, psdu: &[u8]) -> Result<IntensitySamples, FramingError> {
        let chips = build_ppdu_with(psdu, self.mode, self.manchester)?;
        let mut s = modulate(&chips, self.mode.family(), self.sps, self.levels).expect("validated in new");
        s.samples.resize(s.samples.len() + GAP_CHIPS * self.sps, self.levels.lo);
        Ok(s)
    }

    pub fn burst(&self, frame: &MacFrame) -> Result<IntensitySamples, FramingError> {
        self.burst_psdu(&frame.to_bytes()?)
    }

    pub fn airtime_s(&self, psdu_len: usize) -> f64 {
        airtime_s(self.mode, psdu_len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::FrameKind;
    use crate::phy_modes::mode_by_id;

    #[test]
    fn burst_length_matches_airtime() {
        let m = mode_by_id(2).unwrap();
        let t = Transmitter::new(m, 4, Levels::default()).unwrap();
        let f = MacFrame { seq: 3, kind: FrameKind::Chat, payload: b"hola".to_vec() };
        let b = t.burst(&f).unwrap();
        assert!((b.duration_s() - t.airtime_s(12)).abs() < 1e-12);
        assert!(b.samples[b.len() - GAP_CHIPS * 4..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_bad_sps() {
        assert!(Transmitter::new(mode_by_id(5).unwrap(), 3, Levels::default()).is_err());
        assert!(Transmitter::new(mode_by_id(0).unwrap(), 1, Levels::default()).is_err());
    }
}
