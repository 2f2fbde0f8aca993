use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::time::Duration;

use super::wire::{decode_header, encode_header, encode_samples, HEADER_LEN};
use super::{MediumEvent, SampleSink, SampleSource};
use crate::channel::ChannelError;
use crate::waveform::IntensitySamples;

/// Records a sample stream: one header, then raw samples. The header is
/// written with the first block.
#[derive(Debug)]
pub struct FileSink {
    out: BufWriter<File>,
    rate: Option<u32>,
}

impl FileSink {
    pub fn create(path: &Path) -> Result<Self, ChannelError> {
        Ok(FileSink { out: BufWriter::new(File::create(path)?), rate: None })
    }

    pub fn flush(&mut self) -> Result<(), ChannelError> {
        Ok(self.out.flush()?)
    }
}

impl SampleSink for FileSink {
    fn publish(&mut self, block: &IntensitySamples) -> Result<(), ChannelError> {
        match self.rate {
            None => {
                self.out.write_all(&encode_header(block.sample_rate_hz))?;
                self.rate = Some(block.sample_rate_hz);
            }
            Some(r) if r != block.sample_rate_hz => {
                return Err(ChannelError::Format(format!(
                    "sample rate changed from {r} to {} within one file",
                    block.sample_rate_hz
                )))
            }
            Some(_) => {}
        }
        let mut buf = Vec::new();
        encode_samples(&block.samples, &mut buf);
        self.out.write_all(&buf)?;
        Ok(())
    }
}

impl Drop for FileSink {
    fn drop(&mut self) {
        let _ = self.out.flush();
    }
}

/// Replays a recorded stream in fixed-size blocks.
#[derive(Debug)]
pub struct FileSource {
    input: BufReader<File>,
    rate: u32,
    block: usize,
    done: bool,
}

impl FileSource {
    pub const DEFAULT_BLOCK: usize = 4096;

    pub fn open(path: &Path) -> Result<Self, ChannelError> {
        let mut input = BufReader::new(File::open(path)?);
        let mut h = [0u8; HEADER_LEN];
        input.read_exact(&mut h)?;
        let rate = decode_header(&h)?;
        Ok(FileSource { input, rate, block: Self::DEFAULT_BLOCK, done: false })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.rate
    }

    /// Reads every remaining sample.
    pub fn read_all(mut self) -> Result<IntensitySamples, ChannelError> {
        let mut rest = Vec::new();
        self.input.read_to_end(&mut rest)?;
        Ok(IntensitySamples::new(self.rate, super::wire::decode_samples(&rest)?))
    }
}

impl SampleSource for FileSource {
    fn recv_timeout(&mut self, _timeout: Duration) -> Result<Option<MediumEvent>, ChannelError> {
        if self.done {
            return Ok(Some(MediumEvent::End));
        }
        let mut buf = vec![0u8; self.block * 4];
        let mut got = 0;
        while got < buf.len() {
            match self.input.read(&mut buf[got..])? {
                0 => break,
                n => got += n,
            }
        }
        if got == 0 {
            self.done = true;
            return Ok(Some(MediumEvent::End));
        }
        buf.truncate(got);
        let samples = super::wire::decode_samples(&buf)?;
        Ok(Some(MediumEvent::Samples(IntensitySamples::new(self.rate, samples))))
    }
}
