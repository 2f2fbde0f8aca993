//! Engine behaviour over the transports: broadcast fan-out, capture files,
//! backpressure, pacing and runtime reconfiguration.

use std::time::{Duration, Instant};

use serde_json::json;

use silence::channel::medium::{FileSink, FileSource, InprocMedium, SampleSink, SampleSource};
use silence::framing::{FrameKind, MacFrame, MAC_OVERHEAD};
use silence::link::Transmitter;
use silence::link::{airtime_s, Engine, EngineOptions, LinkConfig, LinkError, Pacing, Role};
use silence::phy_modes::mode_by_id;
use silence::waveform::Levels;

fn opts(pacing: Pacing) -> EngineOptions {
    EngineOptions { pacing, probe_interval: None, ..Default::default() }
}

fn cfg(mode_id: u8, role: Role) -> LinkConfig {
    LinkConfig { mode_id, sps: 2, role, ..Default::default() }
}

fn on(medium: &InprocMedium, c: LinkConfig, pacing: Pacing) -> Engine {
    let sink = c.role.transmits().then(|| Box::new(medium.clone()) as Box<dyn SampleSink>);
    let source = c.role.receives().then(|| Box::new(medium.subscribe()) as Box<dyn SampleSource>);
    Engine::start_with(c, opts(pacing), sink, source).unwrap()
}

fn chat(i: usize) -> Vec<u8> {
    format!("message {i:03} {}", "x".repeat(i % 40)).into_bytes()
}

#[test]
fn broadcast_reaches_every_receiver_identically() {
    let medium = InprocMedium::new();
    let rxs: Vec<Engine> = (0..3).map(|_| on(&medium, cfg(6, Role::Rx), Pacing::Virtual)).collect();
    let tx = on(&medium, cfg(6, Role::Tx), Pacing::Virtual);
    assert_eq!(medium.subscriber_count(), 3);
    for i in 0..50 {
        tx.tx_submit(FrameKind::Chat, &chat(i)).unwrap();
    }
    tx.drain(Duration::from_secs(10)).unwrap();
    for rx in &rxs {
        let s = rx.drain(Duration::from_secs(10)).unwrap();
        assert_eq!((s.frames_tx, s.frames_ok, s.per), (50, 50, Some(0.0)));
        let got = rx.rx_poll();
        let seqs: Vec<u16> = got.iter().map(|d| d.seq).collect();
        assert_eq!(seqs, (0..50).collect::<Vec<u16>>(), "poll order is seq order");
        assert!(got.iter().enumerate().all(|(i, d)| d.kind == FrameKind::Chat && d.payload == chat(i)));
    }
}

#[test]
fn capture_file_holds_the_exact_bursts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cap.slnc");
    let c = cfg(2, Role::Tx);
    let tx = Engine::start_with(c.clone(), opts(Pacing::Virtual), Some(Box::new(FileSink::create(&path).unwrap())), None).unwrap();
    let payloads: Vec<Vec<u8>> = (0..12).map(chat).collect();
    for p in &payloads {
        tx.tx_submit(FrameKind::Chat, p).unwrap();
    }
    tx.drain(Duration::from_secs(10)).unwrap();
    tx.shutdown();

    // independent reference: one burst per frame, back to back
    let t = Transmitter::new(mode_by_id(2).unwrap(), 2, Levels::default()).unwrap();
    let mut expect = Vec::new();
    for (i, p) in payloads.iter().enumerate() {
        expect.extend(t.burst(&MacFrame { seq: i as u16, kind: FrameKind::Chat, payload: p.clone() }).unwrap().samples);
    }
    let file = FileSource::open(&path).unwrap();
    assert_eq!(file.sample_rate_hz(), 200_000 * 2);
    let got = file.read_all().unwrap();
    assert!(got.samples == expect, "capture differs from reference bursts");

    // replay through a receiving engine
    let rx = Engine::start_with(cfg(2, Role::Rx), opts(Pacing::Virtual), None, Some(Box::new(FileSource::open(&path).unwrap()))).unwrap();
    let s = rx.drain(Duration::from_secs(10)).unwrap();
    assert_eq!((s.frames_ok, s.frames_tx), (12, 12));
    let back: Vec<Vec<u8>> = rx.rx_poll().into_iter().map(|d| d.payload).collect();
    assert_eq!(back, payloads);
}

#[test]
fn queue_applies_backpressure() {
    let medium = InprocMedium::new();
    let tx = on(&medium, cfg(0, Role::Tx), Pacing::RealTime);
    let results: Vec<_> = (0..300).map(|i| tx.tx_submit(FrameKind::Chat, &chat(i))).collect();
    let accepted = results.iter().take_while(|r| r.is_ok()).count();
    // one frame may already be on the air, outside the queue
    assert!((256..=257).contains(&accepted), "{accepted}");
    assert!(results[accepted..].iter().all(|r| matches!(r, Err(LinkError::Backpressure(256)))));

    // an oversized stream payload is refused whole
    let big = vec![0u8; 40 * 1023];
    assert!(matches!(tx.tx_submit(FrameKind::Stream, &big), Err(LinkError::Backpressure(_))));
    tx.shutdown();
}

#[test]
fn virtual_clock_is_the_sum_of_airtimes_across_a_mode_change() {
    let medium = InprocMedium::new();
    let e = on(&medium, cfg(1, Role::Both), Pacing::Virtual);
    let mut expect_s = 0.0;
    for i in 0..20 {
        let p = chat(i);
        e.tx_submit(FrameKind::Chat, &p).unwrap();
        expect_s += airtime_s(mode_by_id(1).unwrap(), p.len() + MAC_OVERHEAD);
    }
    e.drain(Duration::from_secs(10)).unwrap();
    e.reconfigure(json!({"mode_id": 3})).unwrap();
    for i in 20..40 {
        let p = chat(i);
        e.tx_submit(FrameKind::Chat, &p).unwrap();
        expect_s += airtime_s(mode_by_id(3).unwrap(), p.len() + MAC_OVERHEAD);
    }
    let s = e.drain(Duration::from_secs(10)).unwrap();
    assert_eq!((s.frames_tx, s.frames_ok), (40, 40));
    assert!((e.now_s() - expect_s).abs() < 1e-9, "{} vs {expect_s}", e.now_s());
    assert_eq!(e.chips_sent() as f64, (expect_s * 200_000.0).round());
    let seqs: Vec<u16> = e.rx_poll().iter().map(|d| d.seq).collect();
    assert_eq!(seqs, (0..40).collect::<Vec<u16>>());
}

#[test]
fn goodput_of_full_frames_is_near_the_nominal_rate() {
    for mode_id in [4u8, 8] {
        let medium = InprocMedium::new();
        let e = on(&medium, cfg(mode_id, Role::Both), Pacing::Virtual);
        let data: Vec<u8> = (0..40 * 1023).map(|i| (i % 253) as u8).collect();
        let seqs = e.tx_submit(FrameKind::Stream, &data).unwrap();
        assert_eq!(seqs.len(), 40);
        let s = e.drain(Duration::from_secs(20)).unwrap();
        assert_eq!(s.frames_ok, 40);
        let got: Vec<u8> = e.rx_poll().into_iter().flat_map(|d| d.payload).collect();
        assert_eq!(got, data);
        let rate = mode_by_id(mode_id as u32).unwrap().nominal_rate_bps;
        let goodput = 8.0 * data.len() as f64 / e.now_s();
        assert!(goodput >= 0.8 * rate && goodput <= rate, "mode {mode_id}: {goodput} vs {rate}");
    }
}

#[test]
fn real_time_pacing_holds_the_chip_clock() {
    let medium = InprocMedium::new();
    let rx = on(&medium, cfg(8, Role::Rx), Pacing::RealTime);
    let tx = on(&medium, cfg(8, Role::Tx), Pacing::RealTime);
    let feed = rx.subscribe();
    let t0 = Instant::now();
    for i in 0..30u8 {
        tx.tx_submit(FrameKind::Stream, &[i; 1023]).unwrap();
    }
    // switch within the family while frames are still queued
    let first = feed.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(first.seq, 0);
    tx.reconfigure(json!({"mode_id": 7})).unwrap();
    tx.drain(Duration::from_secs(20)).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    // a burst is published whole at the start of its slot, so the sender
    // may lead the clock by at most the last frame
    let last = airtime_s(mode_by_id(7).unwrap(), 1023 + MAC_OVERHEAD);
    let chips = tx.chips_sent() as f64;
    assert!(chips <= 400_000.0 * (elapsed + last), "{chips} chips in {elapsed} s");

    let s = rx.drain(Duration::from_secs(5)).unwrap();
    assert_eq!((s.frames_tx, s.frames_ok), (30, 30), "each frame is sent whole in one mode");
    let mut seqs = vec![first.seq];
    seqs.extend(feed.try_iter().map(|d| d.seq));
    assert_eq!(seqs, (0..30).collect::<Vec<u16>>());
    // some frames went out at the lower rate
    let all_fast = 30.0 * airtime_s(mode_by_id(8).unwrap(), 1023 + MAC_OVERHEAD);
    assert!(elapsed > all_fast);
}
