//! Sample-by-sample photodetection: gain, ambient, noise, saturation.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64;

use super::{ChannelError, ChannelParams};
use crate::waveform::IntensitySamples;

/// Stateful channel for one receiver. Carries the noise generator, the
/// optional low-pass state and clip counters across blocks.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: ChannelParams,
    signal_scale: f64,
    rng: Pcg64,
    lowpass_state: Option<f64>,
    lowpass_rate: u32,
    lowpass_alpha: f64,
    clipped: u64,
    seen: u64,
}

impl Propagator {
    pub fn new(params: ChannelParams) -> Result<Self, ChannelError> {
        params.validate()?;
        Ok(Propagator {
            signal_scale: params.peak_signal_current(),
            rng: Pcg64::seed_from_u64(params.seed),
            lowpass_state: None,
            lowpass_rate: 0,
            lowpass_alpha: 1.0,
            clipped: 0,
            seen: 0,
            params,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    /// Swaps in new parameters at a block boundary, keeping the noise stream.
    pub fn set_params(&mut self, params: ChannelParams) -> Result<(), ChannelError> {
        params.validate()?;
        self.signal_scale = params.peak_signal_current();
        if params.lowpass_cutoff_hz != self.params.lowpass_cutoff_hz {
            self.lowpass_rate = 0;
        }
        self.params = params;
        Ok(())
    }

    fn alpha(&mut self, rate: u32) -> Option<f64> {
        let fc = self.params.lowpass_cutoff_hz?;
        if self.lowpass_rate != rate {
            self.lowpass_rate = rate;
            self.lowpass_alpha = 1.0 - (-2.0 * std::f64::consts::PI * fc / rate as f64).exp();
        }
        Some(self.lowpass_alpha)
    }

    /// Photocurrent for `tx`, normalized by the saturation current.
    pub fn process(&mut self, tx: &IntensitySamples) -> IntensitySamples {
        let p = &self.params;
        let (sat, amb, sigma) = (p.saturation_current_a, p.ambient_current_a, p.noise_std_a);
        let scale = self.signal_scale;
        let alpha = self.alpha(tx.sample_rate_hz);
        let mut out = Vec::with_capacity(tx.len());
        let mut clipped = 0u64;
        for &x in &tx.samples {
            let mut s = scale * x as f64;
            if let Some(a) = alpha {
                let st = self.lowpass_state.get_or_insert(s);
                *st += a * (s - *st);
                s = *st;
            }
            let n: f64 = if sigma > 0.0 { sigma * Distribution::<f64>::sample(&StandardNormal, &mut self.rng) } else { 0.0 };
            let i = s + amb + n;
            if i >= sat {
                clipped += 1;
            }
            out.push((i.clamp(0.0, sat) / sat) as f32);
        }
        self.clipped += clipped;
        self.seen += tx.len() as u64;
        IntensitySamples::new(tx.sample_rate_hz, out)
    }

    /// Samples clipped at full scale and samples seen since the last call.
    pub fn take_clip_counts(&mut self) -> (u64, u64) {
        let r = (self.clipped, self.seen);
        self.clipped = 0;
        self.seen = 0;
        r
    }
}

/// One-shot propagation with a fresh generator seeded from `params.seed`.
pub fn propagate(tx: &IntensitySamples, params: &ChannelParams) -> Result<IntensitySamples, ChannelError> {
    Ok(Propagator::new(params.clone())?.process(tx))
}

/// Per-subscriber seed derived from a master seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, subscriber: u64) -> u64 {
    let mut z = master ^ subscriber.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
