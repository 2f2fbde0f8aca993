//! Record a transmission to a capture file, then replay it through a
//! receiver at a chosen distance.
//!
//!     cargo run --example capture_file [path] [distance_m]

use std::time::Duration;

use silence::channel::medium::{FileSink, FileSource};
use silence::framing::FrameKind;
use silence::link::{Engine, EngineOptions, LinkConfig, Pacing, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| std::env::temp_dir().join("silence-capture.slnc").display().to_string());
    let distance: f64 = args.next().map_or(Ok(9.0), |s| s.parse())?;
    let opts = EngineOptions { pacing: Pacing::Virtual, probe_interval: None, ..Default::default() };
    let cfg = LinkConfig { mode_id: 0, sps: 2, ..Default::default() };

    let tx = Engine::start_with(LinkConfig { role: Role::Tx, ..cfg.clone() }, opts.clone(), Some(Box::new(FileSink::create(path.as_ref())?)), None)?;
    for i in 0..100u32 {
        tx.tx_submit(FrameKind::Chat, format!("captured message {i}").as_bytes())?;
    }
    tx.drain(Duration::from_secs(30))?;
    tx.shutdown();
    println!("wrote {path} ({} bytes)", std::fs::metadata(&path)?.len());

    let mut rx_cfg = LinkConfig { role: Role::Rx, ..cfg };
    rx_cfg.channel.distance_m = distance;
    rx_cfg.channel.noise_std_a = 7e-8;
    let rx = Engine::start_with(rx_cfg, opts, None, Some(Box::new(FileSource::open(path.as_ref())?)))?;
    let s = rx.drain(Duration::from_secs(30))?;
    println!("replayed at {distance} m: {} / {} ok, PER {:.3}", s.frames_ok, s.frames_tx, s.per.unwrap_or(0.0));
    Ok(())
}
