//! The PHY-I mode table and the rate arithmetic behind it.
//!
//!     cargo run --example modes

use silence::phy_modes::{data_rate, mode_by_id, mode_table, render_table};

fn main() {
    print!("{}", render_table());
    for m in mode_table() {
        let rs = m.rs.map_or(1.0, |p| p.k as f64 / p.n as f64);
        let cc = m.cc_rate.map_or(1.0, |c| c.as_f64());
        println!(
            "mode {}: {} Hz x {:.4} (RLL) x {:.4} (RS) x {:.4} (CC) = {:.1} b/s",
            m.id,
            m.optical_clock_hz,
            m.family().rll().rate(),
            rs,
            cc,
            data_rate(m)
        );
    }
    assert!(mode_by_id(9).is_err());
}
