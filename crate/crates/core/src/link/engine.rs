//! Threaded node: an actor thread owns configuration and statistics, a TX
//! worker paces frames onto the medium, an RX worker decodes what arrives.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, unbounded, Receiver as ChanRx, RecvTimeoutError, Sender, TrySendError};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{LinkConfig, Role};
use super::{LinkError, Receiver, RxEvent, Transmitter};
use crate::channel::medium::{FileSink, FileSource, InprocMedium, MediumEvent, MediumSpec, SampleSink, SampleSource, UdpSink, UdpSource};
use crate::channel::{electrical_snr, Propagator};
use crate::framing::{FrameKind, MacFrame, MAX_PAYLOAD};
use crate::phy_modes::mode_by_id;
use crate::stats::{Accounting, FailKind, LinkStats, StatsTracker};
use crate::waveform::DEFAULT_THRESHOLD;

type Transports = (Option<Box<dyn SampleSink>>, Option<Box<dyn SampleSource>>, Option<InprocMedium>);

pub const DEFAULT_QUEUE: usize = 256;
/// Frames kept for [`Engine::rx_poll`] before the oldest are dropped.
pub const POLL_BACKLOG: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pacing {
    /// Sleep for each frame's air time.
    RealTime,
    /// Do not sleep; the engine clock advances by air time instead.
    Virtual,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub pacing: Pacing,
    pub queue_capacity: usize,
    /// Idle time after which a PROBE frame is sent; `None` disables probes.
    pub probe_interval: Option<Duration>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { pacing: Pacing::RealTime, queue_capacity: DEFAULT_QUEUE, probe_interval: Some(Duration::from_secs(1)) }
    }
}

/// A frame handed to the application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivered {
    pub kind: FrameKind,
    pub seq: u16,
    pub payload: Vec<u8>,
}

enum Clock {
    Real(Instant),
    Virtual(AtomicU64),
}

impl Clock {
    fn now(&self) -> f64 {
        match self {
            Clock::Real(t0) => t0.elapsed().as_secs_f64(),
            Clock::Virtual(bits) => f64::from_bits(bits.load(Ordering::Acquire)),
        }
    }

    fn advance(&self, dt: f64) {
        if let Clock::Virtual(bits) = self {
            let now = f64::from_bits(bits.load(Ordering::Acquire));
            bits.store((now + dt).to_bits(), Ordering::Release);
        }
    }
}

struct Shared {
    config: RwLock<LinkConfig>,
    version: AtomicU64,
    clock: Clock,
    stop: AtomicBool,
    queued: AtomicUsize,
    published: AtomicU64,
    consumed: AtomicU64,
    chips_sent: AtomicU64,
    // next sequence number, shared by data frames and probes
    next_seq: Mutex<u16>,
    last_rx_activity: Mutex<Instant>,
}

enum Cmd {
    Tx { seq: u16 },
    Rx { events: Vec<RxEvent>, clipped: u64, seen: u64 },
    Poll(Sender<Vec<Delivered>>),
    Stats(Sender<LinkStats>),
    Reconfigure(Value, Sender<Result<LinkConfig, LinkError>>),
    /// The flag hands the poll backlog to the new subscriber first.
    Subscribe(Sender<Delivered>, bool),
    Drain(Sender<LinkStats>),
    TransportError(String),
    Stop,
}

struct Job {
    seq: u16,
    kind: FrameKind,
    payload: Vec<u8>,
}

pub struct Engine {
    shared: Arc<Shared>,
    cmd: Sender<Cmd>,
    jobs: Mutex<Option<Sender<Job>>>,
    capacity: usize,
    medium: Option<InprocMedium>,
    threads: Mutex<Vec<JoinHandle<()>>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config()).finish()
    }
}

/// Splits a payload into MAC-sized pieces. An empty payload is one empty
/// frame.
pub fn segment(payload: &[u8]) -> Vec<&[u8]> {
    if payload.is_empty() {
        return vec![payload];
    }
    payload.chunks(MAX_PAYLOAD).collect()
}

impl Engine {
    /// Starts a node on the medium named in `config`. An in-process medium
    /// is created privately; use [`Engine::start_with`] to share one.
    pub fn start(config: LinkConfig, options: EngineOptions) -> Result<Self, LinkError> {
        config.validate()?;
        let role = config.role;
        let (sink, source, medium): Transports = match &config.medium {
            MediumSpec::Inproc => {
                let m = InprocMedium::new();
                let source = role.receives().then(|| Box::new(m.subscribe()) as Box<dyn SampleSource>);
                let sink = role.transmits().then(|| Box::new(m.clone()) as Box<dyn SampleSink>);
                (sink, source, Some(m))
            }
            MediumSpec::Udp(addr) => {
                if role == Role::Both {
                    return Err(LinkError::Config("a UDP node is either tx or rx".into()));
                }
                let sink = role.transmits().then(|| UdpSink::connect(addr)).transpose()?.map(|s| Box::new(s) as Box<dyn SampleSink>);
                let source = role.receives().then(|| UdpSource::bind(addr)).transpose()?.map(|s| Box::new(s) as Box<dyn SampleSource>);
                (sink, source, None)
            }
            MediumSpec::File(path) => {
                if role == Role::Both {
                    return Err(LinkError::Config("a file node is either tx or rx".into()));
                }
                let p = std::path::Path::new(path);
                let sink = role.transmits().then(|| FileSink::create(p)).transpose()?.map(|s| Box::new(s) as Box<dyn SampleSink>);
                let source = role.receives().then(|| FileSource::open(p)).transpose()?.map(|s| Box::new(s) as Box<dyn SampleSource>);
                (sink, source, None)
            }
        };
        let mut e = Self::start_with(config, options, sink, source)?;
        e.medium = medium;
        Ok(e)
    }

    /// Starts a node on caller-supplied transports. The sink is required for
    /// transmitting roles, the source for receiving ones.
    pub fn start_with(
        config: LinkConfig,
        options: EngineOptions,
        sink: Option<Box<dyn SampleSink>>,
        source: Option<Box<dyn SampleSource>>,
    ) -> Result<Self, LinkError> {
        config.validate()?;
        let role = config.role;
        if role.transmits() && sink.is_none() {
            return Err(LinkError::Config("transmitting role without a sample sink".into()));
        }
        if role.receives() && source.is_none() {
            return Err(LinkError::Config("receiving role without a sample source".into()));
        }
        let accounting = match role {
            Role::Both => Accounting::KnownTx,
            Role::Rx => Accounting::SequenceGaps,
            Role::Tx => Accounting::TxOnly,
        };
        let mut tracker = StatsTracker::new(accounting, config.window_s);
        if options.pacing == Pacing::Virtual {
            // receivers may trail the virtual clock by any amount
            tracker.set_settle_time(f64::INFINITY);
        }
        let shared = Arc::new(Shared {
            config: RwLock::new(config),
            version: AtomicU64::new(0),
            clock: match options.pacing {
                Pacing::RealTime => Clock::Real(Instant::now()),
                Pacing::Virtual => Clock::Virtual(AtomicU64::new(0f64.to_bits())),
            },
            stop: AtomicBool::new(false),
            queued: AtomicUsize::new(0),
            published: AtomicU64::new(0),
            consumed: AtomicU64::new(0),
            chips_sent: AtomicU64::new(0),
            next_seq: Mutex::new(0),
            last_rx_activity: Mutex::new(Instant::now()),
        });
        let (cmd_tx, cmd_rx) = unbounded();
        let mut threads = Vec::new();

        let actor = Actor { shared: shared.clone(), tracker, backlog: VecDeque::new(), subscribers: Vec::new() };
        threads.push(spawn("silence-actor", move || actor.run(cmd_rx))?);

        let mut jobs = None;
        if let Some(sink) = sink {
            let (jtx, jrx) = bounded(options.queue_capacity);
            let w = TxWorker { shared: shared.clone(), cmd: cmd_tx.clone(), sink, pacing: options.pacing, probe: options.probe_interval };
            threads.push(spawn("silence-tx", move || w.run(jrx))?);
            jobs = Some(jtx);
        }
        if let Some(source) = source {
            let w = RxWorker { shared: shared.clone(), cmd: cmd_tx.clone(), source };
            threads.push(spawn("silence-rx", move || w.run())?);
        }
        Ok(Engine {
            shared,
            cmd: cmd_tx,
            jobs: Mutex::new(jobs),
            capacity: options.queue_capacity,
            medium: None,
            threads: Mutex::new(threads),
        })
    }

    /// The in-process medium this node publishes on, when it created one.
    /// Other nodes may subscribe to it.
    pub fn medium(&self) -> Option<&InprocMedium> {
        self.medium.as_ref()
    }

    pub fn config(&self) -> LinkConfig {
        self.shared.config.read().unwrap().clone()
    }

    /// Engine clock in seconds: wall time, or summed air time when virtual.
    pub fn now_s(&self) -> f64 {
        self.shared.clock.now()
    }

    /// Chips put on the medium so far.
    pub fn chips_sent(&self) -> u64 {
        self.shared.chips_sent.load(Ordering::Acquire)
    }

    /// Queues a payload, segmenting STREAM payloads larger than one frame.
    /// Returns the sequence numbers assigned. All segments are queued or
    /// none is.
    pub fn tx_submit(&self, kind: FrameKind, payload: &[u8]) -> Result<Vec<u16>, LinkError> {
        if payload.len() > MAX_PAYLOAD && kind != FrameKind::Stream {
            return Err(crate::framing::FramingError::PayloadTooLarge(payload.len()).into());
        }
        let pieces = segment(payload);
        let mut guard = self.jobs.lock().unwrap();
        let jobs = guard.as_mut().ok_or(if self.shared.stop.load(Ordering::Acquire) {
            LinkError::Stopped
        } else {
            LinkError::Role("tx")
        })?;
        if jobs.len() + pieces.len() > self.capacity {
            return Err(LinkError::Backpressure(self.capacity));
        }
        let mut next = self.shared.next_seq.lock().unwrap();
        let mut seqs = Vec::with_capacity(pieces.len());
        for p in pieces {
            let seq = *next;
            self.shared.queued.fetch_add(1, Ordering::AcqRel);
            match jobs.try_send(Job { seq, kind, payload: p.to_vec() }) {
                Ok(()) => {}
                Err(TrySendError::Full(_)) => {
                    self.shared.queued.fetch_sub(1, Ordering::AcqRel);
                    return Err(LinkError::Backpressure(self.capacity));
                }
                Err(TrySendError::Disconnected(_)) => {
                    self.shared.queued.fetch_sub(1, Ordering::AcqRel);
                    return Err(LinkError::Stopped);
                }
            }
            *next = next.wrapping_add(1);
            seqs.push(seq);
        }
        Ok(seqs)
    }

    fn ask<T>(&self, make: impl FnOnce(Sender<T>) -> Cmd) -> Result<T, LinkError> {
        let (tx, rx) = bounded(1);
        self.cmd.send(make(tx)).map_err(|_| LinkError::Stopped)?;
        rx.recv().map_err(|_| LinkError::Stopped)
    }

    /// Intact frames received since the last poll, in arrival order.
    pub fn rx_poll(&self) -> Vec<Delivered> {
        self.ask(Cmd::Poll).unwrap_or_default()
    }

    /// Every frame delivered from now on is also sent to the returned channel.
    pub fn subscribe(&self) -> ChanRx<Delivered> {
        let (tx, rx) = unbounded();
        let _ = self.cmd.send(Cmd::Subscribe(tx, false));
        rx
    }

    /// Like [`subscribe`](Self::subscribe), but the channel first yields
    /// every frame not yet taken by [`rx_poll`](Self::rx_poll), so nothing
    /// received before the call is missed. Those frames leave the poll
    /// buffer.
    pub fn subscribe_with_backlog(&self) -> ChanRx<Delivered> {
        let (tx, rx) = unbounded();
        let _ = self.cmd.send(Cmd::Subscribe(tx, true));
        rx
    }

    pub fn stats_snapshot(&self) -> Result<LinkStats, LinkError> {
        self.ask(Cmd::Stats)
    }

    /// Applies a partial config. The TX worker picks it up before its next
    /// frame and the RX worker before its next sample block.
    pub fn reconfigure(&self, patch: Value) -> Result<LinkConfig, LinkError> {
        self.ask(|r| Cmd::Reconfigure(patch, r))?
    }

    /// Waits until queued frames are on the medium and the receiver has
    /// caught up, settles every outstanding frame and returns the stats.
    pub fn drain(&self, timeout: Duration) -> Result<LinkStats, LinkError> {
        let deadline = Instant::now() + timeout;
        let role = self.config().role;
        let quiet = Duration::from_millis(300);
        loop {
            let s = &self.shared;
            let tx_done = s.queued.load(Ordering::Acquire) == 0;
            let rx_done = match (role, &self.medium) {
                (Role::Both, Some(_)) => s.consumed.load(Ordering::Acquire) >= s.published.load(Ordering::Acquire),
                (Role::Tx, _) => true,
                _ => s.last_rx_activity.lock().unwrap().elapsed() >= quiet,
            };
            if tx_done && rx_done {
                break;
            }
            if Instant::now() >= deadline {
                break;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        self.ask(Cmd::Drain)
    }

    /// Stops all workers. Queued frames that were not sent are discarded.
    pub fn shutdown(&self) {
        self.shared.stop.store(true, Ordering::Release);
        self.jobs.lock().unwrap().take();
        if let Some(m) = &self.medium {
            m.close();
        }
        let _ = self.cmd.send(Cmd::Stop);
        for t in self.threads.lock().unwrap().drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn spawn(name: &str, f: impl FnOnce() + Send + 'static) -> Result<JoinHandle<()>, LinkError> {
    std::thread::Builder::new()
        .name(name.into())
        .spawn(f)
        .map_err(|e| LinkError::Config(format!("cannot start {name}: {e}")))
}

struct Actor {
    shared: Arc<Shared>,
    tracker: StatsTracker,
    backlog: VecDeque<Delivered>,
    subscribers: Vec<Sender<Delivered>>,
}

impl Actor {
    fn run(mut self, cmds: ChanRx<Cmd>) {
        loop {
            let cmd = match cmds.recv_timeout(Duration::from_millis(100)) {
                Ok(c) => c,
                Err(RecvTimeoutError::Timeout) => {
                    self.tracker.tick(self.shared.clock.now());
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => return,
            };
            let now = self.shared.clock.now();
            match cmd {
                Cmd::Tx { seq } => self.tracker.on_tx(seq, now),
                Cmd::Rx { events, clipped, seen } => {
                    self.tracker.on_clip(clipped, seen, now);
                    for ev in events {
                        self.on_event(ev, now);
                    }
                }
                Cmd::Poll(r) => {
                    let _ = r.send(self.backlog.drain(..).collect());
                }
                Cmd::Stats(r) => {
                    let _ = r.send(self.snapshot(now));
                }
                Cmd::Reconfigure(patch, r) => {
                    let current = self.shared.config.read().unwrap().clone();
                    let res = current.patched(&patch);
                    if let Ok(next) = &res {
                        self.tracker.set_window(next.window_s);
                        *self.shared.config.write().unwrap() = next.clone();
                        self.shared.version.fetch_add(1, Ordering::AcqRel);
                        log::info!("configuration applied: {patch}");
                    }
                    let _ = r.send(res);
                }
                Cmd::Subscribe(s, replay) => {
                    if replay {
                        for d in self.backlog.drain(..) {
                            let _ = s.send(d);
                        }
                    }
                    self.subscribers.push(s);
                }
                Cmd::Drain(r) => {
                    self.tracker.drain(now);
                    let _ = r.send(self.snapshot(now));
                }
                Cmd::TransportError(e) => log::error!("transport failed: {e}"),
                Cmd::Stop => return,
            }
        }
    }

    fn snapshot(&mut self, now: f64) -> LinkStats {
        let cfg = self.shared.config.read().unwrap();
        let snr = electrical_snr(&cfg.channel, cfg.levels);
        drop(cfg);
        self.tracker.tick(now);
        self.tracker.snapshot(now, snr)
    }

    fn on_event(&mut self, ev: RxEvent, now: f64) {
        match ev {
            RxEvent::Frame { frame, .. } => {
                if self.tracker.on_ok(frame.seq, frame.payload.len(), now) {
                    let d = Delivered { kind: frame.kind, seq: frame.seq, payload: frame.payload };
                    self.subscribers.retain(|s| s.send(d.clone()).is_ok());
                    if self.backlog.len() == POLL_BACKLOG {
                        self.backlog.pop_front();
                    }
                    self.backlog.push_back(d);
                }
            }
            RxEvent::HeaderFail { .. } => self.tracker.on_fail(FailKind::Header, now),
            RxEvent::CrcFail { .. } => self.tracker.on_fail(FailKind::Crc, now),
        }
    }
}

struct TxWorker {
    shared: Arc<Shared>,
    cmd: Sender<Cmd>,
    sink: Box<dyn SampleSink>,
    pacing: Pacing,
    probe: Option<Duration>,
}

impl TxWorker {
    fn run(mut self, jobs: ChanRx<Job>) {
        let mut next_free = Instant::now();
        loop {
            let wait = self.probe.unwrap_or(Duration::from_millis(200));
            let (job, from_queue) = match jobs.recv_timeout(wait) {
                Ok(j) => (j, true),
                Err(RecvTimeoutError::Timeout) if self.probe.is_some() => {
                    let mut next = self.shared.next_seq.lock().unwrap();
                    if !jobs.is_empty() {
                        // a submit won the race; its frame goes first
                        continue;
                    }
                    let seq = *next;
                    *next = next.wrapping_add(1);
                    (Job { seq, kind: FrameKind::Probe, payload: Vec::new() }, false)
                }
                Err(RecvTimeoutError::Timeout) => continue,
                Err(RecvTimeoutError::Disconnected) => return,
            };
            if self.shared.stop.load(Ordering::Acquire) {
                return;
            }
            if self.pacing == Pacing::RealTime {
                let now = Instant::now();
                if next_free > now {
                    std::thread::sleep(next_free - now);
                }
                next_free = next_free.max(now);
            }
            let sent = self.transmit(&job);
            if from_queue {
                // only now is the frame accounted for, see `Engine::drain`
                self.shared.queued.fetch_sub(1, Ordering::AcqRel);
            }
            match sent {
                Ok(airtime) => {
                    next_free += Duration::from_secs_f64(airtime);
                    self.shared.clock.advance(airtime);
                }
                Err(e) => {
                    let _ = self.cmd.send(Cmd::TransportError(e.to_string()));
                    return;
                }
            }
        }
    }

    fn transmit(&mut self, job: &Job) -> Result<f64, LinkError> {
        let (mode_id, sps, levels) = {
            let c = self.shared.config.read().unwrap();
            (c.mode_id, c.sps, c.levels)
        };
        let tx = Transmitter::new(mode_by_id(mode_id as u32)?, sps, levels)?;
        let burst = tx.burst(&MacFrame { seq: job.seq, kind: job.kind, payload: job.payload.clone() })?;
        let _ = self.cmd.send(Cmd::Tx { seq: job.seq });
        self.sink.publish(&burst)?;
        self.shared.published.fetch_add(1, Ordering::AcqRel);
        self.shared.chips_sent.fetch_add((burst.len() / sps) as u64, Ordering::AcqRel);
        Ok(burst.duration_s())
    }
}

struct RxWorker {
    shared: Arc<Shared>,
    cmd: Sender<Cmd>,
    source: Box<dyn SampleSource>,
}

impl RxWorker {
    fn run(mut self) {
        let (mut version, cfg) = (self.shared.version.load(Ordering::Acquire), self.shared.config.read().unwrap().clone());
        let family = |id: u8| mode_by_id(id as u32).expect("validated").family();
        let mut prop = Propagator::new(cfg.channel.clone()).expect("validated");
        let mut rx = Receiver::new(family(cfg.mode_id), cfg.sps, DEFAULT_THRESHOLD);
        let mut events = Vec::new();
        while !self.shared.stop.load(Ordering::Acquire) {
            let ev = match self.source.recv_timeout(Duration::from_millis(50)) {
                Ok(Some(ev)) => ev,
                Ok(None) => continue,
                Err(e) => {
                    let _ = self.cmd.send(Cmd::TransportError(e.to_string()));
                    return;
                }
            };
            let v = self.shared.version.load(Ordering::Acquire);
            if v != version {
                version = v;
                let c = self.shared.config.read().unwrap().clone();
                prop.set_params(c.channel).expect("validated");
                rx.reconfigure(family(c.mode_id), c.sps);
            }
            *self.shared.last_rx_activity.lock().unwrap() = Instant::now();
            let end = match ev {
                MediumEvent::Samples(block) => {
                    let y = prop.process(&block);
                    rx.push(&y.samples, &mut events);
                    false
                }
                MediumEvent::Erasure { samples, .. } => {
                    rx.push_erasure(samples, &mut events);
                    false
                }
                MediumEvent::End => {
                    rx.flush(&mut events);
                    true
                }
            };
            let (clipped, seen) = prop.take_clip_counts();
            let _ = self.cmd.send(Cmd::Rx { events: std::mem::take(&mut events), clipped, seen });
            if !end {
                self.shared.consumed.fetch_add(1, Ordering::AcqRel);
            } else {
                return;
            }
        }
    }
}
