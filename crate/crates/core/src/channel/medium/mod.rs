//! Sample transports carrying transmitted intensity from one publisher to
//! any number of subscribers. Each subscriber applies its own channel.

mod file;
mod inproc;
mod udp;
pub mod wire;

use std::time::Duration;

pub use self::file::{FileSink, FileSource};
pub use self::inproc::{InprocMedium, InprocSubscription};
pub use self::udp::{UdpSink, UdpSource, CHUNK_SAMPLES};

use super::ChannelError;
use crate::waveform::IntensitySamples;

#[derive(Debug, Clone, PartialEq)]
pub enum MediumEvent {
    Samples(IntensitySamples),
    /// Samples lost in transport; receivers substitute dark samples.
    Erasure { samples: usize, sample_rate_hz: u32 },
    End,
}

pub trait SampleSink: Send {
    fn publish(&mut self, block: &IntensitySamples) -> Result<(), ChannelError>;
}

pub trait SampleSource: Send {
    /// Next event, or `None` if nothing arrived within `timeout`.
    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<MediumEvent>, ChannelError>;
}

/// Medium selection as written on the command line:
/// `inproc`, `udp:HOST:PORT[,HOST:PORT...]` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "address", rename_all = "lowercase")]
pub enum MediumSpec {
    Inproc,
    Udp(String),
    File(String),
}

impl std::str::FromStr for MediumSpec {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "inproc" => Ok(MediumSpec::Inproc),
            Some(("udp", a)) if !a.is_empty() => Ok(MediumSpec::Udp(a.to_string())),
            Some(("file", p)) if !p.is_empty() => Ok(MediumSpec::File(p.to_string())),
            _ => Err(ChannelError::Config(format!("unknown medium {s:?}; use inproc, udp:ADDR or file:PATH"))),
        }
    }
}

impl std::fmt::Display for MediumSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MediumSpec::Inproc => f.write_str("inproc"),
            MediumSpec::Udp(a) => write!(f, "udp:{a}"),
            MediumSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medium_spec_parsing() {
        assert_eq!("inproc".parse::<MediumSpec>().unwrap(), MediumSpec::Inproc);
        assert_eq!("udp:127.0.0.1:9000".parse::<MediumSpec>().unwrap(), MediumSpec::Udp("127.0.0.1:9000".into()));
        assert_eq!("file:/tmp/x.slnc".parse::<MediumSpec>().unwrap(), MediumSpec::File("/tmp/x.slnc".into()));
        for bad in ["", "udp:", "tcp:1", "inprocx"] {
            assert!(bad.parse::<MediumSpec>().is_err());
        }
        let m = MediumSpec::Udp("h:1".into());
        assert_eq!(m.to_string().parse::<MediumSpec>().unwrap(), m);
    }
}
