pub mod channel;
pub mod cli;
pub mod fec;
pub mod framing;
pub mod line_codes;
pub mod link;
pub mod phy_modes;
pub mod service;
pub mod stats;
pub mod waveform;
