//! PER and goodput against distance for one mode.
//!
//! cargo run --example per_scan -- [mode] [frames] [distances...]

use silence::channel::Scenario;
use silence::link::sim::{run_per_scan, write_scan_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode: u8 = args.first().map_or(Ok(0), |s| s.parse())?;
    let frames: usize = args.get(1).map_or(Ok(2000), |s| s.parse())?;
    let mut distances: Vec<f64> = args.iter().skip(2).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if distances.is_empty() {
        distances = vec![1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
    }
    let scenario = match std::env::var("SCENARIO") {
        Ok(path) => Scenario::load(path.as_ref())?,
        Err(_) => Scenario { sps: 2, ..Default::default() },
    };
    let payload: usize = std::env::var("PAYLOAD").map_or(Ok(64), |s| s.parse())?;
    let rows = run_per_scan(&scenario, mode, &distances, frames, payload)?;
    write_scan_csv(&rows, std::io::stdout())?;
    Ok(())
}
