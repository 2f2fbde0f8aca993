//! Line-of-sight Lambertian link budget.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::waveform::Levels;

/// Geometry, LED and photodiode physics, ambient light, noise and
/// saturation of one simulated optical link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub distance_m: f64,
    pub half_power_angle_deg: f64,
    /// Emission angle at the LED.
    pub tx_angle_deg: f64,
    /// Incidence angle at the photodiode.
    pub rx_angle_deg: f64,
    pub fov_deg: f64,
    pub pd_area_m2: f64,
    pub responsivity_a_per_w: f64,
    /// Optical power at full drive.
    pub tx_power_w: f64,
    pub ambient_current_a: f64,
    pub noise_std_a: f64,
    pub saturation_current_a: f64,
    pub seed: u64,
    /// First-order photocurrent low-pass; `None` disables it.
    #[serde(default)]
    pub lowpass_cutoff_hz: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            distance_m: 1.0,
            half_power_angle_deg: 60.0,
            tx_angle_deg: 0.0,
            rx_angle_deg: 0.0,
            fov_deg: 60.0,
            pd_area_m2: 1e-4,
            responsivity_a_per_w: 0.5,
            tx_power_w: 1.0,
            ambient_current_a: 0.0,
            noise_std_a: 0.0,
            saturation_current_a: 1e-3,
            seed: 1,
            lowpass_cutoff_hz: None,
        }
    }
}

fn check(ok: bool, what: &str) -> Result<(), ChannelError> {
    if ok {
        Ok(())
    } else {
        Err(ChannelError::Config(what.to_string()))
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        check(self.distance_m > 0.0 && self.distance_m.is_finite(), "distance_m must be > 0")?;
        check(
            self.half_power_angle_deg > 0.0 && self.half_power_angle_deg < 90.0,
            "half_power_angle_deg must be in (0, 90)",
        )?;
        check(self.tx_angle_deg >= 0.0, "tx_angle_deg must be >= 0")?;
        check(self.rx_angle_deg >= 0.0, "rx_angle_deg must be >= 0")?;
        check(self.fov_deg > 0.0 && self.fov_deg <= 90.0, "fov_deg must be in (0, 90]")?;
        check(self.pd_area_m2 > 0.0, "pd_area_m2 must be > 0")?;
        check(self.responsivity_a_per_w > 0.0, "responsivity_a_per_w must be > 0")?;
        check(self.tx_power_w > 0.0, "tx_power_w must be > 0")?;
        check(self.ambient_current_a >= 0.0, "ambient_current_a must be >= 0")?;
        check(self.noise_std_a >= 0.0, "noise_std_a must be >= 0")?;
        check(self.saturation_current_a > 0.0, "saturation_current_a must be > 0")?;
        if let Some(fc) = self.lowpass_cutoff_hz {
            check(fc > 0.0, "lowpass_cutoff_hz must be > 0")?;
        }
        Ok(())
    }

    pub fn lambert_order(&self) -> f64 {
        -(2f64.ln()) / self.half_power_angle_deg.to_radians().cos().ln()
    }

    /// Photocurrent at full drive, before ambient and noise.
    pub fn peak_signal_current(&self) -> f64 {
        self.responsivity_a_per_w * self.tx_power_w * los_gain(self)
    }
}

/// Lambertian order m = -ln 2 / ln(cos half-power angle).
pub fn lambert_order(half_power_angle_deg: f64) -> Result<f64, ChannelError> {
    if !(half_power_angle_deg > 0.0 && half_power_angle_deg < 90.0) {
        return Err(ChannelError::Config(format!(
            "half-power angle must be in (0, 90) degrees, got {half_power_angle_deg}"
        )));
    }
    Ok(-(2f64.ln()) / half_power_angle_deg.to_radians().cos().ln())
}

/// DC gain of the direct path:
/// (m+1) A / (2 pi d^2) cos^m(tx angle) cos(rx angle), zero outside the FOV.
pub fn los_gain(p: &ChannelParams) -> f64 {
    if p.rx_angle_deg > p.fov_deg {
        return 0.0;
    }
    let m = p.lambert_order();
    (m + 1.0) * p.pd_area_m2 / (2.0 * PI * p.distance_m * p.distance_m)
        * p.tx_angle_deg.to_radians().cos().powf(m)
        * p.rx_angle_deg.to_radians().cos()
}

/// Half the received level separation over the noise standard deviation,
/// in dB. Infinite when the channel is noiseless.
pub fn electrical_snr(p: &ChannelParams, levels: Levels) -> f64 {
    if p.noise_std_a == 0.0 {
        return f64::INFINITY;
    }
    let swing = p.peak_signal_current() * (levels.hi - levels.lo) as f64;
    20.0 * (swing / (2.0 * p.noise_std_a)).log10()
}
