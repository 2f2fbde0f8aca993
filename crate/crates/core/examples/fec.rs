//! Reed-Solomon over GF(16), the K=7 convolutional code with Viterbi
//! decoding, and the header and frame CRCs.
//!
//!     cargo run --example fec

use silence::fec::{conv_encode, fcs_crc32, gf16_mul, hcs_crc16, rs_decode, rs_encode, viterbi_decode, ConvCode, Gf16, RsCode};
use silence::phy_modes::CcRate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("alpha^4 = {:?}, 7 * 9 = {:?}", Gf16::alpha_pow(4), gf16_mul(Gf16::new(7), Gf16::new(9)));

    let code = RsCode::new(11)?;
    let msg: Vec<Gf16> = (1..=11).map(Gf16::new).collect();
    let mut word = rs_encode(&msg, &code)?;
    println!("RS(15,11) codeword {:?}", word.iter().map(|g| g.value()).collect::<Vec<_>>());
    word[2] = word[2] + Gf16::new(5);
    word[9] = word[9] + Gf16::new(12);
    let dec = rs_decode(&word, &code)?;
    println!("two symbol errors -> corrected {} symbols, message intact: {}", dec.corrected, dec.message == msg);
    word[0] = word[0] + Gf16::new(1);
    println!("three symbol errors -> {:?}", rs_decode(&word, &code).map(|d| d.corrected));

    let cc = ConvCode::new(CcRate::Third);
    let bits: Vec<u8> = (0..24).map(|i| (i * 5 % 7 % 2) as u8).collect();
    let mut coded = conv_encode(&bits, cc);
    for i in [3, 20, 41] {
        coded[i] ^= 1;
    }
    let back = viterbi_decode(&coded, cc)?;
    println!("CC 1/3: {} bits -> {} coded, 3 flips, decoded intact: {}", bits.len(), coded.len(), back == bits);

    println!("CRC-16 HCS of \"123456789\" = {:04x}", hcs_crc16(b"123456789"));
    println!("CRC-32 FCS of \"123456789\" = {:08x}", fcs_crc32(b"123456789"));
    Ok(())
}
