//! Manchester and 4B6B run-length-limited line codes.
//!
//!     cargo run --example line_codes

use silence::line_codes::{fourb6b_decode, fourb6b_encode, manchester_decode, manchester_encode, FOURB6B_TABLE};

fn show(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bits = [1, 0, 1, 1, 0, 0, 1, 0];
    let m = manchester_encode(&bits);
    println!("bits       {}", show(&bits));
    println!("manchester {}", show(&m));
    assert_eq!(manchester_decode(&m)?, bits);

    let v = fourb6b_encode(&bits)?;
    println!("4b6b       {}", show(&v));
    assert_eq!(fourb6b_decode(&v)?, bits);

    println!("\nnibble -> codeword (weight)");
    for (n, cw) in FOURB6B_TABLE.iter().enumerate() {
        println!("  {n:04b} -> {cw:06b} ({})", cw.count_ones());
    }

    // an invalid chip pair is reported, not guessed
    println!("\ndecode of 11: {:?}", manchester_decode(&[1, 1]));
    Ok(())
}
