//! PHY-I operating modes.
//!
//! Nine operating points split into two clock families: five OOK modes at a
//! 200 kHz optical clock with Manchester line coding, and four VPPM modes at
//! 400 kHz with 4B6B. Each row carries an optional outer Reed-Solomon code
//! over GF(16) and an optional inner convolutional code.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Intensity modulation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modulation {
    Ook,
    Vppm,
}

/// Run-length-limited line code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rll {
    Manchester,
    #[serde(rename = "4B6B")]
    FourBSixB,
}

impl Rll {
    /// Data bits per chip.
    pub fn rate(self) -> f64 {
        match self {
            Rll::Manchester => 0.5,
            Rll::FourBSixB => 2.0 / 3.0,
        }
    }
}

/// Convolutional code rate. All rates derive from the same K=7 mother code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CcRate {
    #[serde(rename = "1/4")]
    Quarter,
    #[serde(rename = "1/3")]
    Third,
    #[serde(rename = "2/3")]
    TwoThirds,
}

impl CcRate {
    pub fn as_f64(self) -> f64 {
        match self {
            CcRate::Quarter => 0.25,
            CcRate::Third => 1.0 / 3.0,
            CcRate::TwoThirds => 2.0 / 3.0,
        }
    }
}

impl fmt::Display for CcRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CcRate::Quarter => "1/4",
            CcRate::Third => "1/3",
            CcRate::TwoThirds => "2/3",
        })
    }
}

/// Reed-Solomon (n, k) parameters; n is always 15.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RsParams {
    pub n: usize,
    pub k: usize,
}

impl RsParams {
    pub const fn new(k: usize) -> Self {
        RsParams { n: 15, k }
    }

    pub fn rate(self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// Modulation family, which fixes optical clock, line code and preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ook,
    Vppm,
}

impl Family {
    pub fn optical_clock_hz(self) -> u32 {
        match self {
            Family::Ook => 200_000,
            Family::Vppm => 400_000,
        }
    }

    /// Lowest-rate mode of the family, used to carry the PHY header.
    pub fn header_mode(self) -> &'static PhyMode {
        match self {
            Family::Ook => &MODES[0],
            Family::Vppm => &MODES[5],
        }
    }

    pub fn rll(self) -> Rll {
        match self {
            Family::Ook => Rll::Manchester,
            Family::Vppm => Rll::FourBSixB,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Ook => "OOK",
            Family::Vppm => "VPPM",
        })
    }
}

/// One PHY-I operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyMode {
    pub id: u8,
    pub modulation: Modulation,
    pub optical_clock_hz: u32,
    pub rll: Rll,
    pub rs: Option<RsParams>,
    pub cc_rate: Option<CcRate>,
    pub nominal_rate_bps: f64,
}

impl PhyMode {
    pub fn family(&self) -> Family {
        match self.modulation {
            Modulation::Ook => Family::Ook,
            Modulation::Vppm => Family::Vppm,
        }
    }

    pub fn data_rate(&self) -> f64 {
        data_rate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown PHY mode id {0} (valid ids are 0..=8)")]
pub struct UnknownMode(pub u32);

// Rows follow the IEEE 802.15.7 PHY I rate table. Nominal rates are the
// product formula rounded to the nearest bit/s.
static MODES: [PhyMode; 9] = [
    ook(0, Some(RsParams::new(7)), Some(CcRate::Quarter), 11_667.0),
    ook(1, Some(RsParams::new(11)), Some(CcRate::Third), 24_444.0),
    ook(2, Some(RsParams::new(11)), Some(CcRate::TwoThirds), 48_889.0),
    ook(3, Some(RsParams::new(11)), None, 73_333.0),
    ook(4, None, None, 100_000.0),
    vppm(5, Some(RsParams::new(2)), 35_556.0),
    vppm(6, Some(RsParams::new(4)), 71_111.0),
    vppm(7, Some(RsParams::new(7)), 124_444.0),
    vppm(8, None, 266_667.0),
];

const fn ook(id: u8, rs: Option<RsParams>, cc_rate: Option<CcRate>, rate: f64) -> PhyMode {
    PhyMode {
        id,
        modulation: Modulation::Ook,
        optical_clock_hz: 200_000,
        rll: Rll::Manchester,
        rs,
        cc_rate,
        nominal_rate_bps: rate,
    }
}

const fn vppm(id: u8, rs: Option<RsParams>, rate: f64) -> PhyMode {
    PhyMode {
        id,
        modulation: Modulation::Vppm,
        optical_clock_hz: 400_000,
        rll: Rll::FourBSixB,
        rs,
        cc_rate: None,
        nominal_rate_bps: rate,
    }
}

/// The full nine-row table, ordered by id.
pub fn mode_table() -> &'static [PhyMode] {
    &MODES
}

/// Useful bit rate: clock x RLL rate x RS rate x CC rate.
pub fn data_rate(mode: &PhyMode) -> f64 {
    let rs = mode.rs.map_or(1.0, RsParams::rate);
    let cc = mode.cc_rate.map_or(1.0, CcRate::as_f64);
    mode.optical_clock_hz as f64 * mode.rll.rate() * rs * cc
}

pub fn mode_by_id(id: u32) -> Result<&'static PhyMode, UnknownMode> {
    MODES.get(id as usize).ok_or(UnknownMode(id))
}

/// Aligned text rendering of the table.
pub fn render_table() -> String {
    let mut out = format!(
        "{:>2}  {:<10} {:>8}  {:<10} {:<9} {:<4} {:>10}\n",
        "id", "modulation", "clock_hz", "rll", "rs", "cc", "rate_bps"
    );
    for m in mode_table() {
        let row = row_fields(m);
        out.push_str(&format!(
            "{:>2}  {:<10} {:>8}  {:<10} {:<9} {:<4} {:>10}\n",
            row[0], row[1], row[2], row[3], row[4], row[5], row[6]
        ));
    }
    out
}

/// CSV rendering with columns id, modulation, clock_hz, rll, rs, cc, rate_bps.
pub fn render_csv() -> String {
    let mut out = String::from("id,modulation,clock_hz,rll,rs,cc,rate_bps\n");
    for m in mode_table() {
        out.push_str(&row_fields(m).join(","));
        out.push('\n');
    }
    out
}

fn row_fields(m: &PhyMode) -> [String; 7] {
    [
        m.id.to_string(),
        m.family().to_string(),
        m.optical_clock_hz.to_string(),
        match m.rll {
            Rll::Manchester => "Manchester".into(),
            Rll::FourBSixB => "4B6B".into(),
        },
        m.rs.map_or("none".into(), |rs| format!("RS({};{})", rs.n, rs.k)),
        m.cc_rate.map_or("none".into(), |c| c.to_string()),
        format!("{:.0}", m.nominal_rate_bps),
    ]
}
