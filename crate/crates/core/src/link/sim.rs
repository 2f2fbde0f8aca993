//! Synchronous link simulation in virtual time: one transmitter, any number
//! of receivers, each behind its own channel.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use super::{LinkError, Receiver, RxEvent, Transmitter};
use crate::channel::{derive_seed, electrical_snr, ChannelParams, Propagator, Scenario};
use crate::framing::{FrameKind, MacFrame, MAX_PAYLOAD};
use crate::phy_modes::{mode_by_id, PhyMode};
use crate::stats::{Accounting, FailKind, LinkStats, StatsTracker};
use crate::waveform::{Levels, DEFAULT_THRESHOLD};

const SIM_WINDOW_S: f64 = 1e12;

#[derive(Debug)]
struct SimReceiver {
    propagator: Propagator,
    rx: Receiver,
    tracker: StatsTracker,
    ok_mask: Vec<bool>,
    delivered: Vec<MacFrame>,
    keep_delivered: bool,
}

#[derive(Debug)]
pub struct Simulation {
    tx: Transmitter,
    receivers: Vec<SimReceiver>,
    time_s: f64,
    seq: u16,
    events: Vec<RxEvent>,
}

impl Simulation {
    pub fn new(mode: &'static PhyMode, sps: usize, levels: Levels, channels: Vec<ChannelParams>) -> Result<Self, LinkError> {
        let tx = Transmitter::new(mode, sps, levels)?;
        let receivers = channels
            .into_iter()
            .map(|c| {
                Ok(SimReceiver {
                    propagator: Propagator::new(c)?,
                    rx: Receiver::new(mode.family(), sps, DEFAULT_THRESHOLD),
                    tracker: StatsTracker::new(Accounting::KnownTx, SIM_WINDOW_S),
                    ok_mask: Vec::new(),
                    delivered: Vec::new(),
                    keep_delivered: false,
                })
            })
            .collect::<Result<_, LinkError>>()?;
        Ok(Simulation { tx, receivers, time_s: 0.0, seq: 0, events: Vec::new() })
    }

    /// Keep every delivered frame for [`take_delivered`](Self::take_delivered).
    pub fn keep_delivered(&mut self, on: bool) {
        for r in &mut self.receivers {
            r.keep_delivered = on;
        }
    }

    /// Changes the transmit mode. Receivers follow through the header as long
    /// as the clock family is unchanged.
    pub fn set_mode(&mut self, mode: &'static PhyMode) -> Result<(), LinkError> {
        self.tx = Transmitter::new(mode, self.tx.sps, self.tx.levels)?;
        for r in &mut self.receivers {
            r.rx.reconfigure(mode.family(), self.tx.sps);
        }
        Ok(())
    }

    pub fn set_channel(&mut self, receiver: usize, params: ChannelParams) -> Result<(), LinkError> {
        Ok(self.receivers[receiver].propagator.set_params(params)?)
    }

    pub fn elapsed_s(&self) -> f64 {
        self.time_s
    }

    /// Sends one frame to every receiver and settles its outcome.
    pub fn send(&mut self, kind: FrameKind, payload: &[u8]) -> Result<u16, LinkError> {
        let seq = self.seq;
        self.seq = self.seq.wrapping_add(1);
        let burst = self.tx.burst(&MacFrame { seq, kind, payload: payload.to_vec() })?;
        let t0 = self.time_s;
        let t1 = t0 + burst.duration_s();
        for r in &mut self.receivers {
            r.tracker.on_tx(seq, t0);
            let y = r.propagator.process(&burst);
            let (c, s) = r.propagator.take_clip_counts();
            r.tracker.on_clip(c, s, t1);
            self.events.clear();
            r.rx.push(&y.samples, &mut self.events);
            let mut ok = false;
            for ev in self.events.drain(..) {
                match ev {
                    RxEvent::Frame { frame, .. } => {
                        if r.tracker.on_ok(frame.seq, frame.payload.len(), t1) {
                            ok |= frame.seq == seq;
                            if r.keep_delivered {
                                r.delivered.push(frame);
                            }
                        }
                    }
                    RxEvent::HeaderFail { .. } => r.tracker.on_fail(FailKind::Header, t1),
                    RxEvent::CrcFail { .. } => r.tracker.on_fail(FailKind::Crc, t1),
                }
            }
            r.tracker.drain(t1);
            r.ok_mask.push(ok);
        }
        self.time_s = t1;
        Ok(seq)
    }

    pub fn stats(&mut self, receiver: usize) -> LinkStats {
        let now = self.time_s;
        let r = &mut self.receivers[receiver];
        let snr = electrical_snr(r.propagator.params(), self.tx.levels);
        r.tracker.snapshot(now, snr)
    }

    /// Per-frame delivery flags, in send order.
    pub fn ok_mask(&self, receiver: usize) -> &[bool] {
        &self.receivers[receiver].ok_mask
    }

    pub fn take_delivered(&mut self, receiver: usize) -> Vec<MacFrame> {
        std::mem::take(&mut self.receivers[receiver].delivered)
    }
}

/// Deterministic pseudo-random payloads.
pub fn payload_source(seed: u64, len: usize) -> impl FnMut() -> Vec<u8> {
    let mut rng = Pcg64::seed_from_u64(seed);
    move || (0..len).map(|_| rng.random()).collect()
}

/// Sends `frames` payloads of `payload_len` bytes over one channel.
pub fn run_link(
    mode: &'static PhyMode,
    sps: usize,
    levels: Levels,
    channel: ChannelParams,
    frames: usize,
    payload_len: usize,
) -> Result<LinkStats, LinkError> {
    let mut sim = Simulation::new(mode, sps, levels, vec![channel])?;
    let mut next = payload_source(0x5eed, payload_len);
    for _ in 0..frames {
        sim.send(FrameKind::Stream, &next())?;
    }
    Ok(sim.stats(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub distance_m: f64,
    pub frames: u64,
    pub ok: u64,
    pub hdr_fail: u64,
    pub crc_fail: u64,
    pub lost: u64,
    pub per: f64,
    pub goodput_bps: f64,
    /// Infinite for a noiseless channel.
    pub snr_db: f64,
}

pub const SCAN_CSV_HEADER: &str = "distance_m,frames,ok,hdr_fail,crc_fail,lost,per,goodput_bps,snr_db";

impl ScanRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.1},{:.2}",
            self.distance_m, self.frames, self.ok, self.hdr_fail, self.crc_fail, self.lost, self.per, self.goodput_bps, self.snr_db
        )
    }
}

/// PER and goodput against distance. Each point gets its own noise seed
/// derived from the scenario seed.
pub fn run_per_scan(
    scenario: &Scenario,
    mode_id: u8,
    distances: &[f64],
    frames: usize,
    payload_len: usize,
) -> Result<Vec<ScanRow>, LinkError> {
    if distances.is_empty() {
        return Err(LinkError::Config("distance list is empty".into()));
    }
    if frames == 0 {
        return Err(LinkError::Config("frames per point must be > 0".into()));
    }
    if payload_len > MAX_PAYLOAD {
        return Err(LinkError::Config(format!("payload of {payload_len} bytes exceeds {MAX_PAYLOAD}")));
    }
    let mode = mode_by_id(mode_id as u32)?;
    distances
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let channel = ChannelParams { distance_m: d, seed: derive_seed(scenario.channel.seed, i as u64), ..scenario.channel.clone() };
            let snr_db = electrical_snr(&channel, scenario.levels);
            let s = run_link(mode, scenario.sps, scenario.levels, channel, frames, payload_len)?;
            Ok(ScanRow {
                distance_m: d,
                frames: s.frames_tx,
                ok: s.frames_ok,
                hdr_fail: s.frames_hdr_fail,
                crc_fail: s.frames_crc_fail,
                lost: s.frames_lost,
                per: s.per.unwrap_or(0.0),
                goodput_bps: s.goodput_bps,
                snr_db,
            })
        })
        .collect()
}

pub fn write_scan_csv(rows: &[ScanRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{SCAN_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy_modes::mode_table;

    #[test]
    fn noiseless_every_mode() {
        for m in mode_table() {
            let s = run_link(m, 2, Levels::default(), ChannelParams::default(), 20, 64).unwrap();
            assert_eq!((s.frames_tx, s.frames_ok), (20, 20), "mode {}", m.id);
            assert_eq!(s.per, Some(0.0));
            assert!(s.goodput_bps <= m.data_rate());
        }
    }

    #[test]
    fn delivered_payloads_are_exact() {
        let mut sim = Simulation::new(mode_by_id(6).unwrap(), 4, Levels::default(), vec![ChannelParams::default()]).unwrap();
        sim.keep_delivered(true);
        let mut next = payload_source(1, 100);
        let sent: Vec<Vec<u8>> = (0..10).map(|_| next()).collect();
        for p in &sent {
            sim.send(FrameKind::Chat, p).unwrap();
        }
        let got: Vec<Vec<u8>> = sim.take_delivered(0).into_iter().map(|f| f.payload).collect();
        assert_eq!(got, sent);
    }

    #[test]
    fn mode_switch_within_family_is_followed() {
        let mut sim = Simulation::new(mode_by_id(0).unwrap(), 2, Levels::default(), vec![ChannelParams::default()]).unwrap();
        for id in [0, 4, 2, 1, 3] {
            sim.set_mode(mode_by_id(id).unwrap()).unwrap();
            sim.send(FrameKind::Stream, b"abc").unwrap();
        }
        assert_eq!(sim.stats(0).frames_ok, 5);
    }

    #[test]
    fn saturation_kills_the_link() {
        let c = ChannelParams { ambient_current_a: 2e-3, noise_std_a: 1e-7, ..Default::default() };
        let s = run_link(mode_by_id(0).unwrap(), 2, Levels::default(), c, 20, 64).unwrap();
        assert_eq!(s.frames_ok, 0);
        assert!(s.saturated);
        assert!(s.is_conserved());
    }

    #[test]
    fn scan_rows_and_csv() {
        let sc = Scenario { sps: 2, ..Default::default() };
        assert!(run_per_scan(&sc, 0, &[], 10, 64).is_err());
        assert!(run_per_scan(&sc, 12, &[1.0], 10, 64).is_err());
        let rows = run_per_scan(&sc, 4, &[0.1, 1.0], 5, 16).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.per == 0.0 && r.frames == 5));
        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), SCAN_CSV_HEADER);
        assert_eq!(text.lines().count(), 3);
    }
}
