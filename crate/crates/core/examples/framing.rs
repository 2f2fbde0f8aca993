//! MAC frames and PPDUs: build, recover, and reject corruption.
//!
//!     cargo run --example framing

use silence::framing::{build_mac_frame, build_ppdu, parse_mac_frame, recover_ppdu, FrameKind, PREAMBLE_CHIPS};
use silence::phy_modes::mode_by_id;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mac = build_mac_frame(FrameKind::Chat, 42, b"hola, mon")?;
    println!("MAC frame {} bytes: {:02x?}", mac.len(), mac);
    println!("parsed: {:?}", parse_mac_frame(&mac)?);

    let mut bad = mac.clone();
    bad[5] ^= 0x01;
    println!("one flipped bit: {:?}", parse_mac_frame(&bad));

    for id in [0, 4, 5, 8] {
        let mode = mode_by_id(id)?;
        let chips = build_ppdu(&mac, mode)?;
        let (mcs, psdu) = recover_ppdu(&chips[PREAMBLE_CHIPS..], mode.family())?;
        println!("mode {id}: {} chips on air, header says mode {mcs}, PSDU intact: {}", chips.len(), psdu == mac);
    }
    Ok(())
}
