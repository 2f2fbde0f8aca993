//! Modulation, preamble synchronization and demodulation of a burst
//! hidden at an unknown offset in noise.
//!
//!     cargo run --example sync_demod

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg64;

use silence::framing::{build_mac_frame, build_ppdu, recover_ppdu, FrameKind, PREAMBLE_CHIPS};
use silence::phy_modes::mode_by_id;
use silence::waveform::{demodulate_frame, modulate, synchronize, Levels, DEFAULT_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mode, sps, offset) = (mode_by_id(5)?, 8, 1234);
    let mac = build_mac_frame(FrameKind::Stream, 7, &[0xa5; 32])?;
    let burst = modulate(&build_ppdu(&mac, mode)?, mode.family(), sps, Levels::default())?;

    let noise = Normal::new(0.0, 0.15)?;
    let mut rng = Pcg64::seed_from_u64(1);
    let mut rx = vec![0.0f32; offset];
    rx.extend(&burst.samples);
    rx.extend(std::iter::repeat_n(0.0, 500));
    for s in &mut rx {
        *s += noise.sample(&mut rng) as f32;
    }

    let starts = synchronize(&rx, mode.family(), sps, DEFAULT_THRESHOLD);
    println!("burst at sample {offset}, payload expected at {}", offset + PREAMBLE_CHIPS * sps);
    println!("detections: {starts:?}");
    let start = *starts.first().ok_or("no detection")?;
    let chips = demodulate_frame(&rx, start, mode.family(), sps)?;
    let (mcs, psdu) = recover_ppdu(&chips, mode.family())?;
    println!("mode {mcs}, PSDU intact: {}", psdu == mac);
    Ok(())
}
