//! Writes golden vectors for RS, CC, CRC and PPDU encoding as CSV.
//!
//!     cargo run --example fec_vectors -- [OUT_DIR]
//!
//! OUT_DIR defaults to crates/core/tests/vectors. Output is deterministic.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use silence::fec::{fcs_crc32, hcs_crc16, ConvCode, Gf16, RsCode};
use silence::framing::{build_mac_frame, build_ppdu, FrameKind};
use silence::phy_modes::{mode_table, CcRate};

fn nibbles(v: &[Gf16]) -> String {
    v.iter().map(|g| format!("{:x}", g.value())).collect()
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| char::from(b'0' + b)).collect()
}

/// Chips packed MSB first, zero padded to a whole byte.
fn pack_chips(chips: &[u8]) -> String {
    let bytes: Vec<u8> = chips.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |a, (i, &b)| a | (b << (7 - i)))).collect();
    hex::encode(bytes)
}

fn main() -> std::io::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/vectors"));
    std::fs::create_dir_all(&out)?;
    let mut rng = Pcg64::seed_from_u64(0x5eed);

    let mut rs = String::from("k,message,codeword\n");
    for k in [2usize, 4, 7, 11] {
        let code = RsCode::new(k).expect("valid k");
        let mut msgs = vec![vec![Gf16::ZERO; k], vec![Gf16::new(15); k]];
        msgs.extend((0..14).map(|_| (0..k).map(|_| Gf16::new(rng.random_range(0..16))).collect()));
        for m in msgs {
            let c = code.encode(&m).expect("k nibbles");
            writeln!(rs, "{k},{},{}", nibbles(&m), nibbles(&c)).unwrap();
        }
    }

    let mut cc = String::from("rate,input,coded\n");
    for (name, rate) in [("1/4", CcRate::Quarter), ("1/3", CcRate::Third), ("2/3", CcRate::TwoThirds)] {
        let code = ConvCode::new(rate);
        let mut inputs = vec![vec![1u8], vec![0; 8]];
        inputs.extend((0..10).map(|_| (0..rng.random_range(1..=48)).map(|_| rng.random_range(0..2u8)).collect()));
        for input in inputs {
            writeln!(cc, "{name},{},{}", bits(&input), bits(&code.encode(&input))).unwrap();
        }
    }

    let mut crc = String::from("input,hcs_crc16,fcs_crc32\n");
    let mut inputs: Vec<Vec<u8>> = vec![Vec::new(), b"123456789".to_vec(), vec![0; 5], vec![0xff; 5]];
    inputs.extend((0..12).map(|_| (0..rng.random_range(1..=64)).map(|_| rng.random()).collect()));
    for input in inputs {
        writeln!(crc, "{},{:04x},{:08x}", hex::encode(&input), hcs_crc16(&input), fcs_crc32(&input)).unwrap();
    }

    let mut ppdu = String::from("mode,psdu,n_chips,chips\n");
    for m in mode_table() {
        let len = rng.random_range(0..=24);
        let payload: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let psdu = build_mac_frame(FrameKind::Chat, rng.random(), &payload).expect("small payload");
        let chips = build_ppdu(&psdu, m).expect("small frame");
        writeln!(ppdu, "{},{},{},{}", m.id, hex::encode(&psdu), chips.len(), pack_chips(&chips)).unwrap();
    }

    for (name, body) in [("rs.csv", rs), ("cc.csv", cc), ("crc.csv", crc), ("ppdu.csv", ppdu)] {
        std::fs::write(out.join(name), body)?;
        println!("wrote {}", out.join(name).display());
    }
    Ok(())
}
