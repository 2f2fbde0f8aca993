//! End-to-end link over one simulated channel for every mode.
//!
//!     cargo run --example loopback [distance_m] [frames]

use silence::channel::ChannelParams;
use silence::link::run_link;
use silence::phy_modes::mode_table;
use silence::waveform::Levels;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let distance: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;
    let frames: usize = args.next().map_or(Ok(200), |s| s.parse())?;
    let channel = ChannelParams { distance_m: distance, noise_std_a: 7e-8, ..Default::default() };
    println!("{frames} frames x 64 B at {distance} m");
    for m in mode_table() {
        let s = run_link(m, 2, Levels::default(), channel.clone(), frames, 64)?;
        println!("mode {}: ok {:>5}  hdr {:>3}  crc {:>3}  lost {:>3}  PER {:.4}  goodput {:>8.0} b/s", m.id, s.frames_ok, s.frames_hdr_fail, s.frames_crc_fail, s.frames_lost, s.per.unwrap_or(0.0), s.goodput_bps);
    }
    Ok(())
}
