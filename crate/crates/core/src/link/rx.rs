use crate::framing::ppdu::{decode_phr, decode_section, phr_chips, section_chips};
use crate::framing::{parse_mac_frame, MacFrame, MAC_OVERHEAD, MAX_PAYLOAD};
use crate::line_codes::Manchester;
use crate::phy_modes::{Family, PhyMode};
use crate::waveform::{estimate_levels, soft_chips, Correlator, Detection, LevelEstimate, PreambleTemplate, SearchOutcome};

/// What the receiver made of one detected preamble. `start` is the
/// absolute stream index of the first preamble sample.
#[derive(Debug, Clone, PartialEq)]
pub enum RxEvent {
    Frame { frame: MacFrame, mode_id: u8, start: u64 },
    HeaderFail { start: u64 },
    CrcFail { start: u64, mode_id: u8 },
}

#[derive(Debug, Clone, Copy)]
enum State {
    Search,
    Header(Detection, LevelEstimate),
    Body(Detection, LevelEstimate, &'static PhyMode, usize),
}

/// Streaming receiver: preamble search, header decode, then PSDU decode.
/// After a decoded header it skips the frame body before searching again.
#[derive(Debug, Clone)]
pub struct Receiver {
    family: Family,
    sps: usize,
    threshold: f64,
    manchester: Manchester,
    corr: Correlator,
    base: u64,
    cursor: usize,
    state: State,
}

const TRIM_AT: usize = 1 << 16;

impl Receiver {
    pub fn new(family: Family, sps: usize, threshold: f64) -> Self {
        Receiver {
            family,
            sps,
            threshold,
            manchester: Manchester::default(),
            corr: Correlator::new(PreambleTemplate::new(family, sps), threshold),
            base: 0,
            cursor: 0,
            state: State::Search,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    /// Absolute index of the next sample to be pushed.
    pub fn position(&self) -> u64 {
        self.base + self.corr.len() as u64
    }

    /// Switches family or oversampling. Buffered samples are dropped.
    pub fn reconfigure(&mut self, family: Family, sps: usize) {
        if family != self.family || sps != self.sps {
            let pos = self.position();
            *self = Receiver::new(family, sps, self.threshold);
            self.base = pos;
        }
    }

    pub fn push(&mut self, block: &[f32], out: &mut Vec<RxEvent>) {
        self.corr.extend(block);
        self.run(false, out);
        self.trim();
    }

    /// Substitutes `n` dark samples for samples lost in transport.
    pub fn push_erasure(&mut self, n: usize, out: &mut Vec<RxEvent>) {
        self.push(&vec![0.0; n], out);
    }

    /// End of stream: evaluates the buffer tail without lookahead. A frame
    /// cut short is reported as a failure.
    pub fn flush(&mut self, out: &mut Vec<RxEvent>) {
        self.run(true, out);
        match self.state {
            State::Search => {}
            State::Header(d, _) => out.push(RxEvent::HeaderFail { start: self.base + d.start as u64 }),
            State::Body(d, _, m, _) => out.push(RxEvent::CrcFail { start: self.base + d.start as u64, mode_id: m.id }),
        }
        self.state = State::Search;
        self.cursor = self.corr.len();
        self.trim();
    }

    fn run(&mut self, flush: bool, out: &mut Vec<RxEvent>) {
        let sps = self.sps;
        let hdr = phr_chips(self.family);
        loop {
            match self.state {
                State::Search => match self.corr.search(self.cursor, flush) {
                    SearchOutcome::Found(d) => {
                        let lv = estimate_levels(self.corr.samples(), d.start, self.family, sps);
                        self.state = State::Header(d, lv);
                    }
                    SearchOutcome::NeedMore(k) => {
                        self.cursor = k;
                        return;
                    }
                },
                State::Header(d, lv) => {
                    if self.corr.len() < d.data_offset + hdr * sps {
                        return;
                    }
                    let soft = soft_chips(self.corr.samples(), d.data_offset, hdr, self.family, sps, lv).expect("length checked");
                    match decode_phr(&soft, self.family, self.manchester) {
                        Ok((phr, mode)) if (phr.psdu_len as usize) <= MAX_PAYLOAD + MAC_OVERHEAD => {
                            self.state = State::Body(d, lv, mode, phr.psdu_len as usize);
                        }
                        _ => {
                            out.push(RxEvent::HeaderFail { start: self.base + d.start as u64 });
                            self.cursor = d.data_offset;
                            self.state = State::Search;
                        }
                    }
                }
                State::Body(d, lv, mode, len) => {
                    let n = section_chips(mode, len);
                    let body = d.data_offset + hdr * sps;
                    let end = body + n * sps;
                    if self.corr.len() < end {
                        return;
                    }
                    let soft = soft_chips(self.corr.samples(), body, n, self.family, sps, lv).expect("length checked");
                    let dec = decode_section(&soft, mode, len, self.manchester);
                    let start = self.base + d.start as u64;
                    out.push(match (dec.fec_failed, parse_mac_frame(&dec.bytes)) {
                        (false, Ok(frame)) => RxEvent::Frame { frame, mode_id: mode.id, start },
                        _ => RxEvent::CrcFail { start, mode_id: mode.id },
                    });
                    self.cursor = end;
                    self.state = State::Search;
                }
            }
        }
    }

    fn trim(&mut self) {
        let keep_from = match self.state {
            State::Search => self.cursor,
            State::Header(d, _) | State::Body(d, _, _, _) => d.start,
        };
        if keep_from >= TRIM_AT && keep_from * 2 >= self.corr.len() {
            self.corr.discard(keep_from);
            self.base += keep_from as u64;
            self.cursor -= keep_from.min(self.cursor);
            let shift = |d: Detection| Detection { start: d.start - keep_from, data_offset: d.data_offset - keep_from, peak: d.peak };
            self.state = match self.state {
                State::Search => State::Search,
                State::Header(d, lv) => State::Header(shift(d), lv),
                State::Body(d, lv, m, n) => State::Body(shift(d), lv, m, n),
            };
        }
    }
}
