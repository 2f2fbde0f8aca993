//! Scenario files: UTF-8 `key = value` lines, `#` starts a comment.
//!
//! | key                    | unit | default |
//! |------------------------|------|---------|
//! | mode                   | id   | 0       |
//! | sps                    |      | 8       |
//! | level_lo, level_hi     | 0..1 | 0, 1    |
//! | distance_m             | m    | 1       |
//! | half_power_angle_deg   | deg  | 60      |
//! | tx_angle_deg           | deg  | 0       |
//! | rx_angle_deg           | deg  | 0       |
//! | fov_deg                | deg  | 60      |
//! | pd_area_m2             | m^2  | 1e-4    |
//! | responsivity_a_per_w   | A/W  | 0.5     |
//! | tx_power_w             | W    | 1       |
//! | ambient_current_a      | A    | 0       |
//! | noise_std_a            | A    | 0       |
//! | saturation_current_a   | A    | 1e-3    |
//! | seed                   |      | 1       |
//! | lowpass_cutoff_hz      | Hz   | off     |

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{ChannelError, ChannelParams};
use crate::phy_modes::mode_by_id;
use crate::waveform::{Levels, DEFAULT_SPS};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode_id: u8,
    pub sps: usize,
    pub levels: Levels,
    pub channel: ChannelParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario { mode_id: 0, sps: DEFAULT_SPS, levels: Levels::default(), channel: ChannelParams::default() }
    }
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ChannelError> {
    v.parse().map_err(|_| ChannelError::Scenario { line, reason: format!("bad value {v:?} for {key}") })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ChannelError> {
        let mut s = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ChannelError::Scenario { line, reason: "expected key = value".into() })?;
            let c = &mut s.channel;
            match key {
                "mode" => s.mode_id = num(line, key, value)?,
                "sps" => s.sps = num(line, key, value)?,
                "level_lo" => s.levels.lo = num(line, key, value)?,
                "level_hi" => s.levels.hi = num(line, key, value)?,
                "distance_m" => c.distance_m = num(line, key, value)?,
                "half_power_angle_deg" => c.half_power_angle_deg = num(line, key, value)?,
                "tx_angle_deg" => c.tx_angle_deg = num(line, key, value)?,
                "rx_angle_deg" => c.rx_angle_deg = num(line, key, value)?,
                "fov_deg" => c.fov_deg = num(line, key, value)?,
                "pd_area_m2" => c.pd_area_m2 = num(line, key, value)?,
                "responsivity_a_per_w" => c.responsivity_a_per_w = num(line, key, value)?,
                "tx_power_w" => c.tx_power_w = num(line, key, value)?,
                "ambient_current_a" => c.ambient_current_a = num(line, key, value)?,
                "noise_std_a" => c.noise_std_a = num(line, key, value)?,
                "saturation_current_a" => c.saturation_current_a = num(line, key, value)?,
                "seed" => c.seed = num(line, key, value)?,
                "lowpass_cutoff_hz" => {
                    c.lowpass_cutoff_hz = if value == "off" { None } else { Some(num(line, key, value)?) }
                }
                _ => return Err(ChannelError::Scenario { line, reason: format!("unknown key {key:?}") }),
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ChannelError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        mode_by_id(self.mode_id as u32).map_err(|e| ChannelError::Config(e.to_string()))?;
        validate_sps(self.sps)?;
        self.levels.validate().map_err(|e| ChannelError::Config(e.to_string()))?;
        self.channel.validate()
    }

    pub fn to_text(&self) -> String {
        let c = &self.channel;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("mode", self.mode_id.to_string());
        kv("sps", self.sps.to_string());
        kv("level_lo", self.levels.lo.to_string());
        kv("level_hi", self.levels.hi.to_string());
        kv("distance_m", c.distance_m.to_string());
        kv("half_power_angle_deg", c.half_power_angle_deg.to_string());
        kv("tx_angle_deg", c.tx_angle_deg.to_string());
        kv("rx_angle_deg", c.rx_angle_deg.to_string());
        kv("fov_deg", c.fov_deg.to_string());
        kv("pd_area_m2", c.pd_area_m2.to_string());
        kv("responsivity_a_per_w", c.responsivity_a_per_w.to_string());
        kv("tx_power_w", c.tx_power_w.to_string());
        kv("ambient_current_a", c.ambient_current_a.to_string());
        kv("noise_std_a", c.noise_std_a.to_string());
        kv("saturation_current_a", c.saturation_current_a.to_string());
        kv("seed", c.seed.to_string());
        kv("lowpass_cutoff_hz", c.lowpass_cutoff_hz.map_or("off".into(), |f| f.to_string()));
        out
    }
}

/// Samples per chip must be a power of two in 2..=16.
pub fn validate_sps(sps: usize) -> Result<(), ChannelError> {
    if (2..=16).contains(&sps) && sps.is_power_of_two() {
        Ok(())
    } else {
        Err(ChannelError::Config(format!("sps must be a power of two in [2, 16], got {sps}")))
    }
}
