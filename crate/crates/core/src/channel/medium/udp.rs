use std::collections::VecDeque;
use std::io::ErrorKind;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::time::{Duration, Instant};

use super::wire::{decode_chunk, encode_chunk};
use super::{MediumEvent, SampleSink, SampleSource};
use crate::channel::ChannelError;
use crate::waveform::IntensitySamples;

/// Samples per datagram.
pub const CHUNK_SAMPLES: usize = 256;

type DropFilter = Box<dyn FnMut(u32) -> bool + Send>;

/// Sends the stream to one or more UDP destinations, 256 samples per
/// sequence-numbered datagram.
pub struct UdpSink {
    socket: UdpSocket,
    dests: Vec<SocketAddr>,
    seq: u32,
    drop_filter: Option<DropFilter>,
}

impl std::fmt::Debug for UdpSink {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UdpSink").field("dests", &self.dests).field("seq", &self.seq).finish()
    }
}

fn resolve(list: &str) -> Result<Vec<SocketAddr>, ChannelError> {
    let mut out = Vec::new();
    for a in list.split(',').map(str::trim).filter(|a| !a.is_empty()) {
        out.extend(a.to_socket_addrs()?);
    }
    if out.is_empty() {
        return Err(ChannelError::Config(format!("no UDP destination in {list:?}")));
    }
    Ok(out)
}

impl UdpSink {
    /// `dests` is a comma-separated list of `host:port`.
    pub fn connect(dests: &str) -> Result<Self, ChannelError> {
        let dests = resolve(dests)?;
        let local = if dests[0].is_ipv6() { "[::]:0" } else { "0.0.0.0:0" };
        Ok(UdpSink { socket: UdpSocket::bind(local)?, dests, seq: 0, drop_filter: None })
    }

    /// Fault injection: datagrams whose sequence number makes `f` return
    /// true are silently not sent.
    pub fn set_drop_filter(&mut self, f: impl FnMut(u32) -> bool + Send + 'static) {
        self.drop_filter = Some(Box::new(f));
    }
}

impl SampleSink for UdpSink {
    fn publish(&mut self, block: &IntensitySamples) -> Result<(), ChannelError> {
        for chunk in block.samples.chunks(CHUNK_SAMPLES) {
            let seq = self.seq;
            self.seq = self.seq.wrapping_add(1);
            if self.drop_filter.as_mut().is_some_and(|f| f(seq)) {
                continue;
            }
            let dgram = encode_chunk(seq, block.sample_rate_hz, chunk);
            for d in &self.dests {
                self.socket.send_to(&dgram, d)?;
            }
        }
        Ok(())
    }
}

/// Receives a UDP sample stream. Missing sequence numbers become erasures
/// of one chunk each; late or duplicate datagrams are dropped.
#[derive(Debug)]
pub struct UdpSource {
    socket: UdpSocket,
    expected: Option<u32>,
    pending: VecDeque<MediumEvent>,
    buf: Vec<u8>,
    gaps: u64,
}

impl UdpSource {
    pub fn bind(addr: &str) -> Result<Self, ChannelError> {
        Ok(UdpSource {
            socket: UdpSocket::bind(addr)?,
            expected: None,
            pending: VecDeque::new(),
            buf: vec![0u8; 65536],
            gaps: 0,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, ChannelError> {
        Ok(self.socket.local_addr()?)
    }

    /// Number of gaps detected so far.
    pub fn gaps(&self) -> u64 {
        self.gaps
    }

    fn accept(&mut self, seq: u32, rate: u32, samples: Vec<f32>) {
        if let Some(exp) = self.expected {
            let ahead = seq.wrapping_sub(exp);
            if ahead >= 1 << 31 {
                return;
            }
            if ahead > 0 {
                self.gaps += 1;
                self.pending.push_back(MediumEvent::Erasure {
                    samples: ahead as usize * CHUNK_SAMPLES,
                    sample_rate_hz: rate,
                });
            }
        }
        self.expected = Some(seq.wrapping_add(1));
        self.pending.push_back(MediumEvent::Samples(IntensitySamples::new(rate, samples)));
    }
}

impl SampleSource for UdpSource {
    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<MediumEvent>, ChannelError> {
        if let Some(ev) = self.pending.pop_front() {
            return Ok(Some(ev));
        }
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(1));
            self.socket.set_read_timeout(Some(left))?;
            match self.socket.recv_from(&mut self.buf) {
                Ok((n, _)) => match decode_chunk(&self.buf[..n]) {
                    Ok((seq, rate, samples)) => self.accept(seq, rate, samples),
                    Err(e) => log::warn!("dropping malformed datagram: {e}"),
                },
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
            if let Some(ev) = self.pending.pop_front() {
                return Ok(Some(ev));
            }
            if Instant::now() >= deadline {
                return Ok(None);
            }
        }
    }
}
