//! Byte-stream transfer (e.g. a video file) over the video-1.5m scenario,
//! reporting goodput and checking the bytes.
//!
//!     cargo run --example stream [input-file] [distance_m]

use std::time::Duration;

use silence::channel::Scenario;
use silence::framing::FrameKind;
use silence::link::{Engine, EngineOptions, LinkConfig, Pacing, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let data = match args.next() {
        Some(p) => std::fs::read(p)?,
        None => (0..200_000u32).map(|i| (i ^ (i >> 7)) as u8).collect(),
    };
    let sc = Scenario::load("scenarios/video-1.5m".as_ref()).unwrap_or_else(|_| Scenario { mode_id: 7, sps: 2, ..Default::default() });
    let mut cfg = LinkConfig::from_scenario(&sc, "inproc".parse()?, Role::Both);
    if let Some(d) = args.next() {
        cfg.channel.distance_m = d.parse()?;
    }
    let engine = Engine::start(cfg, EngineOptions { pacing: Pacing::Virtual, probe_interval: None, ..Default::default() })?;

    let mut received = Vec::with_capacity(data.len());
    for chunk in data.chunks(64 * 1023) {
        engine.tx_submit(FrameKind::Stream, chunk)?;
        engine.drain(Duration::from_secs(60))?;
        received.extend(engine.rx_poll().into_iter().flat_map(|d| d.payload));
    }
    let s = engine.drain(Duration::from_secs(60))?;
    let secs = engine.now_s();
    println!("{} bytes in {:.2} s of air time: {:.0} b/s useful", received.len(), secs, 8.0 * received.len() as f64 / secs);
    println!("frames {} ok {} PER {:.4}; stream intact: {}", s.frames_tx, s.frames_ok, s.per.unwrap_or(0.0), received == data);
    Ok(())
}
