//! TX and RX nodes joined by the UDP sample transport on localhost. One
//! datagram in 300 is dropped to show how gaps surface as failed frames.
//!
//!     cargo run --example udp_link

use std::time::Duration;

use silence::channel::medium::{UdpSink, UdpSource};
use silence::framing::FrameKind;
use silence::link::{Engine, EngineOptions, LinkConfig, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig { mode_id: 8, sps: 2, ..Default::default() };
    let opts = EngineOptions { probe_interval: None, ..Default::default() };

    let source = UdpSource::bind("127.0.0.1:0")?;
    let addr = source.local_addr()?.to_string();
    let mut sink = UdpSink::connect(&addr)?;
    sink.set_drop_filter(|chunk| chunk % 300 == 150);
    println!("sample stream to udp://{addr}");

    let rx = Engine::start_with(LinkConfig { role: Role::Rx, ..cfg.clone() }, opts.clone(), None, Some(Box::new(source)))?;
    let tx = Engine::start_with(LinkConfig { role: Role::Tx, ..cfg }, opts, Some(Box::new(sink)), None)?;
    for i in 0..60u8 {
        tx.tx_submit(FrameKind::Stream, &[i; 200])?;
    }
    tx.drain(Duration::from_secs(20))?;
    let s = rx.drain(Duration::from_secs(5))?;
    let got: Vec<u16> = rx.rx_poll().iter().map(|d| d.seq).collect();
    println!("received seqs {got:?}");
    println!("tx {} ok {} crc {} hdr {} lost {}", s.frames_tx, s.frames_ok, s.frames_crc_fail, s.frames_hdr_fail, s.frames_lost);
    Ok(())
}
