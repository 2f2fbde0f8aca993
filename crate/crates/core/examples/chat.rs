//! Chat between two engines sharing an in-process medium. Lines typed on
//! stdin are sent; received ones are printed.
//!
//!     cargo run --example chat [distance_m]

use std::io::BufRead;
use std::time::Duration;

use silence::channel::medium::InprocMedium;
use silence::framing::FrameKind;
use silence::link::{Engine, EngineOptions, LinkConfig, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let distance: f64 = std::env::args().nth(1).map_or(Ok(2.0), |s| s.parse())?;
    let mut cfg = LinkConfig { mode_id: 1, sps: 2, ..Default::default() };
    cfg.channel.distance_m = distance;
    cfg.channel.noise_std_a = 7e-8;

    let medium = InprocMedium::new();
    let opts = EngineOptions { probe_interval: None, ..Default::default() };
    let rx = Engine::start_with(LinkConfig { role: Role::Rx, ..cfg.clone() }, opts.clone(), None, Some(Box::new(medium.subscribe())))?;
    let tx = Engine::start_with(LinkConfig { role: Role::Tx, ..cfg }, opts, Some(Box::new(medium.clone())), None)?;

    let feed = rx.subscribe();
    std::thread::spawn(move || {
        for d in feed {
            if d.kind == FrameKind::Chat {
                println!("rx [{}] {}", d.seq, String::from_utf8_lossy(&d.payload));
            }
        }
    });

    println!("type lines, end with Ctrl-D");
    for line in std::io::stdin().lock().lines() {
        let seqs = tx.tx_submit(FrameKind::Chat, line?.as_bytes())?;
        println!("tx {seqs:?}");
    }
    tx.drain(Duration::from_secs(10))?;
    let s = rx.drain(Duration::from_secs(10))?;
    println!("{}", serde_json::to_string_pretty(&s)?);
    Ok(())
}
