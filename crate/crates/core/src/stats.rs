//! Link statistics: frame outcome counters, PER and goodput.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub const DEFAULT_WINDOW_S: f64 = 5.0;
/// Clip fraction at which the receiver is reported as saturated.
pub const SATURATION_FRACTION: f64 = 0.5;

/// A consistent snapshot. Counters are cumulative; `per_window`,
/// `goodput_bps` and `clip_fraction` cover the last `window_s` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub frames_tx: u64,
    pub frames_ok: u64,
    pub frames_hdr_fail: u64,
    pub frames_crc_fail: u64,
    pub frames_lost: u64,
    /// Detections that matched no transmitted frame.
    pub false_detections: u64,
    /// `(frames_tx - frames_ok) / frames_tx`; `None` before anything was sent.
    pub per: Option<f64>,
    pub per_window: Option<f64>,
    pub goodput_bps: f64,
    pub window_s: f64,
    pub clip_fraction: f64,
    pub saturated: bool,
    /// `None` when the channel is noiseless.
    pub snr_db: Option<f64>,
}

impl LinkStats {
    pub fn is_conserved(&self) -> bool {
        self.frames_tx == self.frames_ok + self.frames_hdr_fail + self.frames_crc_fail + self.frames_lost
    }

    pub const CSV_HEADER: &'static str =
        "time_s,frames_tx,frames_ok,frames_hdr_fail,frames_crc_fail,frames_lost,per,per_window,goodput_bps,clip_fraction,saturated,snr_db";

    pub fn csv_row(&self, time_s: f64) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
        format!(
            "{time_s:.3},{},{},{},{},{},{},{},{:.1},{:.4},{},{}",
            self.frames_tx,
            self.frames_ok,
            self.frames_hdr_fail,
            self.frames_crc_fail,
            self.frames_lost,
            opt(self.per),
            opt(self.per_window),
            self.goodput_bps,
            self.clip_fraction,
            self.saturated,
            self.snr_db.map_or("inf".to_string(), |v| format!("{v:.2}")),
        )
    }
}

/// How transmitted frames become known to the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accounting {
    /// The transmitter reports every frame it sends.
    KnownTx,
    /// Receive-only: transmitted frames are inferred from sequence gaps.
    SequenceGaps,
    /// Transmit-only: only `frames_tx` is meaningful and PER is undefined.
    TxOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailKind {
    Header,
    Crc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Ok(usize),
    Fail(FailKind),
    Lost,
}

#[derive(Debug, Clone)]
pub struct StatsTracker {
    accounting: Accounting,
    window_s: f64,
    settle_s: f64,
    pending_tx: VecDeque<(u16, f64)>,
    pending_fail: VecDeque<(FailKind, f64)>,
    last_ok: Option<u16>,
    tx: u64,
    ok: u64,
    hdr: u64,
    crc: u64,
    lost: u64,
    false_det: u64,
    recent: VecDeque<(f64, Outcome)>,
    clips: VecDeque<(f64, u64, u64)>,
    first_t: Option<f64>,
}

impl StatsTracker {
    pub fn new(accounting: Accounting, window_s: f64) -> Self {
        StatsTracker {
            accounting,
            window_s,
            settle_s: 2.0,
            pending_tx: VecDeque::new(),
            pending_fail: VecDeque::new(),
            last_ok: None,
            tx: 0,
            ok: 0,
            hdr: 0,
            crc: 0,
            lost: 0,
            false_det: 0,
            recent: VecDeque::new(),
            clips: VecDeque::new(),
            first_t: None,
        }
    }

    /// Unresolved frames older than this are settled by [`tick`](Self::tick).
    pub fn set_settle_time(&mut self, s: f64) {
        self.settle_s = s;
    }

    pub fn set_window(&mut self, window_s: f64) {
        self.window_s = window_s;
    }

    pub fn accounting(&self) -> Accounting {
        self.accounting
    }

    fn touch(&mut self, t: f64) {
        self.first_t.get_or_insert(t);
    }

    fn record(&mut self, t: f64, o: Outcome) {
        match o {
            Outcome::Ok(_) => self.ok += 1,
            Outcome::Fail(FailKind::Header) => self.hdr += 1,
            Outcome::Fail(FailKind::Crc) => self.crc += 1,
            Outcome::Lost => self.lost += 1,
        }
        self.recent.push_back((t, o));
    }

    /// Resolves one frame that did not arrive intact.
    fn resolve_missing(&mut self, t: f64) {
        match self.pending_fail.pop_front() {
            Some((k, _)) => self.record(t, Outcome::Fail(k)),
            None => self.record(t, Outcome::Lost),
        }
    }

    pub fn on_tx(&mut self, seq: u16, t: f64) {
        self.touch(t);
        match self.accounting {
            Accounting::KnownTx => {
                self.tx += 1;
                self.pending_tx.push_back((seq, t));
            }
            Accounting::TxOnly => self.tx += 1,
            Accounting::SequenceGaps => {}
        }
    }

    /// Records an intact frame. Returns false for duplicates and for frames
    /// the tracker has no record of sending.
    pub fn on_ok(&mut self, seq: u16, payload_len: usize, t: f64) -> bool {
        self.touch(t);
        match self.accounting {
            Accounting::TxOnly => return false,
            Accounting::KnownTx => {
                let Some(pos) = self.pending_tx.iter().position(|&(s, _)| s == seq) else {
                    return false;
                };
                for _ in 0..pos {
                    self.pending_tx.pop_front();
                    self.resolve_missing(t);
                }
                self.pending_tx.pop_front();
                self.absorb_stale_failures(t);
            }
            Accounting::SequenceGaps => {
                let gap = match self.last_ok {
                    None => self.pending_fail.len(),
                    Some(last) => {
                        let ahead = seq.wrapping_sub(last);
                        if ahead == 0 || ahead >= 1 << 15 {
                            return false;
                        }
                        ahead as usize - 1
                    }
                };
                self.tx += gap as u64 + 1;
                for _ in 0..gap {
                    self.resolve_missing(t);
                }
                self.false_det += self.pending_fail.len() as u64;
                self.pending_fail.clear();
                self.last_ok = Some(seq);
            }
        }
        self.record(t, Outcome::Ok(payload_len));
        true
    }

    /// Failure events seen before an intact frame that has nothing pending
    /// ahead of it cannot belong to any sent frame.
    fn absorb_stale_failures(&mut self, t: f64) {
        if self.pending_tx.is_empty() || self.pending_fail.front().is_some_and(|&(_, ft)| ft < t - self.settle_s) {
            self.false_det += self.pending_fail.len() as u64;
            self.pending_fail.clear();
        }
    }

    pub fn on_fail(&mut self, kind: FailKind, t: f64) {
        if self.accounting == Accounting::TxOnly {
            return;
        }
        self.touch(t);
        self.pending_fail.push_back((kind, t));
    }

    pub fn on_clip(&mut self, clipped: u64, seen: u64, t: f64) {
        if seen > 0 {
            self.clips.push_back((t, clipped, seen));
        }
    }

    /// Settles frames sent more than the settle time before `now`.
    pub fn tick(&mut self, now: f64) {
        if self.accounting == Accounting::KnownTx {
            while self.pending_tx.front().is_some_and(|&(_, t)| t < now - self.settle_s) {
                self.pending_tx.pop_front();
                self.resolve_missing(now);
            }
            if self.pending_tx.is_empty() {
                while self.pending_fail.front().is_some_and(|&(_, t)| t < now - self.settle_s) {
                    self.pending_fail.pop_front();
                    self.false_det += 1;
                }
            }
        }
        self.expire(now);
    }

    /// Settles everything still outstanding. Call once the pipeline is idle.
    pub fn drain(&mut self, now: f64) {
        match self.accounting {
            Accounting::KnownTx => {
                while self.pending_tx.pop_front().is_some() {
                    self.resolve_missing(now);
                }
                self.false_det += self.pending_fail.len() as u64;
                self.pending_fail.clear();
            }
            Accounting::TxOnly => {}
            Accounting::SequenceGaps => {
                // trailing failures are taken as frames sent after the last good one
                while let Some((k, _)) = self.pending_fail.pop_front() {
                    self.tx += 1;
                    self.record(now, Outcome::Fail(k));
                }
            }
        }
    }

    fn expire(&mut self, now: f64) {
        let cut = now - self.window_s;
        while self.recent.front().is_some_and(|&(t, _)| t < cut) {
            self.recent.pop_front();
        }
        while self.clips.front().is_some_and(|&(t, _, _)| t < cut) {
            self.clips.pop_front();
        }
    }

    pub fn snapshot(&mut self, now: f64, snr_db: f64) -> LinkStats {
        self.expire(now);
        let resolved = self.recent.len();
        let (mut ok_w, mut bits) = (0usize, 0f64);
        for &(_, o) in &self.recent {
            if let Outcome::Ok(n) = o {
                ok_w += 1;
                bits += 8.0 * n as f64;
            }
        }
        let span = self.first_t.map_or(0.0, |f| (now - f).min(self.window_s));
        let (c, s) = self.clips.iter().fold((0u64, 0u64), |(a, b), &(_, c, s)| (a + c, b + s));
        let clip_fraction = if s == 0 { 0.0 } else { c as f64 / s as f64 };
        let tx_only = self.accounting == Accounting::TxOnly;
        LinkStats {
            frames_tx: self.tx,
            frames_ok: self.ok,
            frames_hdr_fail: self.hdr,
            frames_crc_fail: self.crc,
            frames_lost: self.lost + self.pending_tx.len() as u64,
            false_detections: self.false_det,
            per: (self.tx > 0 && !tx_only).then(|| (self.tx - self.ok) as f64 / self.tx as f64),
            per_window: (resolved > 0).then(|| (resolved - ok_w) as f64 / resolved as f64),
            goodput_bps: if span > 0.0 { bits / span } else { 0.0 },
            window_s: self.window_s,
            clip_fraction,
            saturated: clip_fraction >= SATURATION_FRACTION,
            snr_db: snr_db.is_finite().then_some(snr_db),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn headline_per() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 1e9);
        for i in 0..1000u32 {
            s.on_tx(i as u16, i as f64 * 1e-3);
            if i != 500 {
                assert!(s.on_ok(i as u16, 64, i as f64 * 1e-3));
            }
        }
        s.drain(1.0);
        let snap = s.snapshot(1.0, f64::INFINITY);
        assert_eq!(snap.per, Some(0.001));
        assert_eq!(snap.frames_lost, 1);
        assert!(snap.is_conserved());
        assert_eq!(snap.snr_db, None);
    }

    #[test]
    fn nothing_sent_is_not_healthy() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        let snap = s.snapshot(0.0, 10.0);
        assert_eq!(snap.per, None);
        assert_eq!(snap.per_window, None);
        assert_eq!(snap.snr_db, Some(10.0));
    }

    #[test]
    fn goodput_counts_payload_bits_only() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        for i in 0..10u16 {
            let t = i as f64 * 0.1;
            s.on_tx(i, t);
            s.on_ok(i, 64, t);
        }
        // 10 frames x 512 payload bits over the 1 s since the first event
        let snap = s.snapshot(1.0, 0.0);
        assert!((snap.goodput_bps - 5120.0).abs() < 1e-9);
    }

    #[test]
    fn failures_attach_to_missing_frames() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        for i in 0..4 {
            s.on_tx(i, 0.0);
        }
        s.on_fail(FailKind::Crc, 0.1);
        s.on_ok(2, 10, 0.2);
        s.on_fail(FailKind::Header, 0.3);
        s.drain(0.4);
        let snap = s.snapshot(0.4, 0.0);
        assert_eq!((snap.frames_ok, snap.frames_crc_fail, snap.frames_lost, snap.frames_hdr_fail), (1, 1, 1, 1));
        assert!(snap.is_conserved());
    }

    #[test]
    fn spurious_failures_are_false_detections() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        s.on_fail(FailKind::Header, 0.0);
        s.on_tx(0, 1.0);
        s.on_ok(0, 1, 1.1);
        s.drain(2.0);
        let snap = s.snapshot(2.0, 0.0);
        assert_eq!(snap.false_detections, 1);
        assert_eq!(snap.frames_hdr_fail, 0);
        assert!(snap.is_conserved());
    }

    #[test]
    fn sequence_gaps_with_wrap() {
        let mut s = StatsTracker::new(Accounting::SequenceGaps, 5.0);
        assert!(s.on_ok(65534, 5, 0.0));
        s.on_fail(FailKind::Crc, 0.1);
        assert!(s.on_ok(2, 5, 0.2)); // 65535, 0, 1 missing
        assert!(!s.on_ok(2, 5, 0.3));
        assert!(!s.on_ok(1, 5, 0.3));
        let snap = s.snapshot(0.4, 0.0);
        assert_eq!(snap.frames_tx, 5);
        assert_eq!((snap.frames_ok, snap.frames_crc_fail, snap.frames_lost), (2, 1, 2));
        assert!(snap.is_conserved());
    }

    #[test]
    fn settling_by_time() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        s.on_tx(0, 0.0);
        s.tick(1.0);
        assert_eq!(s.snapshot(1.0, 0.0).frames_lost, 1);
        s.tick(2.5);
        let snap = s.snapshot(2.5, 0.0);
        assert_eq!(snap.frames_lost, 1);
        assert_eq!(snap.per_window, Some(1.0));
    }

    #[test]
    fn window_forgets_old_outcomes() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 1.0);
        s.on_tx(0, 0.0);
        s.tick(3.0);
        s.on_tx(1, 4.5);
        s.on_ok(1, 8, 4.5);
        let snap = s.snapshot(4.5, 0.0);
        assert_eq!(snap.per_window, Some(0.0));
        assert_eq!(snap.per, Some(0.5));
    }

    #[test]
    fn tx_only_has_no_per() {
        let mut s = StatsTracker::new(Accounting::TxOnly, 5.0);
        s.on_tx(0, 0.0);
        s.on_fail(FailKind::Crc, 0.0);
        s.tick(10.0);
        s.drain(10.0);
        let snap = s.snapshot(10.0, 0.0);
        assert_eq!((snap.frames_tx, snap.frames_lost, snap.frames_crc_fail), (1, 0, 0));
        assert_eq!(snap.per, None);
    }

    #[test]
    fn clip_flag() {
        let mut s = StatsTracker::new(Accounting::KnownTx, 5.0);
        s.on_clip(95, 100, 0.0);
        assert!(s.snapshot(0.0, 0.0).saturated);
        s.on_clip(0, 100, 0.1);
        let snap = s.snapshot(0.1, 0.0);
        assert!(!snap.saturated);
        assert!((snap.clip_fraction - 0.475).abs() < 1e-12);
    }

    #[derive(Debug, Clone)]
    enum Ev {
        Tx,
        Ok(usize),
        Fail(bool),
        Tick,
    }

    fn ev() -> impl Strategy<Value = Ev> {
        prop_oneof![
            4 => Just(Ev::Tx),
            3 => (0usize..4).prop_map(Ev::Ok),
            1 => any::<bool>().prop_map(Ev::Fail),
            1 => Just(Ev::Tick),
        ]
    }

    proptest! {
        #[test]
        fn conservation_after_drain(events in proptest::collection::vec(ev(), 0..200), gaps in any::<bool>()) {
            let acc = if gaps { Accounting::SequenceGaps } else { Accounting::KnownTx };
            let mut s = StatsTracker::new(acc, 5.0);
            let mut next = 0u16;
            let mut t = 0.0;
            for e in events {
                t += 0.3;
                match e {
                    Ev::Tx => { s.on_tx(next, t); next = next.wrapping_add(1); }
                    Ev::Ok(back) => {
                        let seq = next.wrapping_sub(1 + back as u16);
                        s.on_ok(seq, 10, t);
                    }
                    Ev::Fail(h) => s.on_fail(if h { FailKind::Header } else { FailKind::Crc }, t),
                    Ev::Tick => s.tick(t),
                }
                prop_assert!(s.snapshot(t, 0.0).is_conserved());
            }
            s.drain(t);
            let snap = s.snapshot(t, 0.0);
            prop_assert!(snap.is_conserved());
            if let Some(p) = snap.per { prop_assert!((0.0..=1.0).contains(&p)); }
        }
    }
}
