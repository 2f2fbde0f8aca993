//! Lambertian line-of-sight budget: gain, SNR and clipping against
//! distance and ambient light.
//!
//!     cargo run --example channel_budget [scenario-file]

use silence::channel::{electrical_snr, lambert_order, los_gain, propagate, ChannelParams, Scenario};
use silence::waveform::{modulate_ook, Levels};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = match std::env::args().nth(1) {
        Some(p) => Scenario::load(p.as_ref())?.channel,
        None => ChannelParams { noise_std_a: 7e-8, ..Default::default() },
    };
    println!("Lambertian order at {} deg: {:.3}", base.half_power_angle_deg, lambert_order(base.half_power_angle_deg)?);
    println!("{:>6} {:>12} {:>12} {:>9}", "d (m)", "gain", "peak I (A)", "SNR (dB)");
    for d in [0.5, 1.0, 1.5, 2.0, 4.0, 8.0, 10.0, 12.0] {
        let p = ChannelParams { distance_m: d, ..base.clone() };
        println!("{d:>6} {:>12.3e} {:>12.3e} {:>9.2}", los_gain(&p), p.peak_signal_current(), electrical_snr(&p, Levels::default()));
    }

    let chips: Vec<u8> = (0..2000).map(|i| (i % 3 == 0) as u8).collect();
    let tx = modulate_ook(&chips, 4, Levels::default())?;
    for ambient in [0.0, 0.5, 1.0, 2.0] {
        let p = ChannelParams { distance_m: 1.0, ambient_current_a: ambient * base.saturation_current_a, ..base.clone() };
        let rx = propagate(&tx, &p)?;
        let clipped = rx.samples.iter().filter(|&&s| s >= 1.0).count() as f64 / rx.len() as f64;
        println!("ambient {ambient:.1} x saturation -> {:.1} % of samples clipped", 100.0 * clipped);
    }
    Ok(())
}
