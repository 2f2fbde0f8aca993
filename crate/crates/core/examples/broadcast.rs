//! One transmitter, several receivers at different distances, each with
//! its own channel and noise.
//!
//!     cargo run --example broadcast

use silence::channel::{derive_seed, Scenario};
use silence::framing::FrameKind;
use silence::link::Simulation;
use silence::phy_modes::mode_by_id;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario::load("scenarios/text-8m".as_ref()).unwrap_or_else(|_| Scenario { sps: 2, ..Default::default() });
    let distances = [2.0, 8.0, 9.5, 10.5];
    let channels = distances
        .iter()
        .enumerate()
        .map(|(i, &d)| silence::channel::ChannelParams { distance_m: d, seed: derive_seed(sc.channel.seed, i as u64), ..sc.channel.clone() })
        .collect();
    let mut sim = Simulation::new(mode_by_id(sc.mode_id as u32)?, sc.sps, sc.levels, channels)?;
    for i in 0..2000u32 {
        sim.send(FrameKind::Chat, &i.to_be_bytes().repeat(16))?;
    }
    for (i, d) in distances.iter().enumerate() {
        let s = sim.stats(i);
        println!("receiver {i} at {d:>4} m: {} / {} ok, PER {:.4}", s.frames_ok, s.frames_tx, s.per.unwrap_or(0.0));
    }
    let (near, far) = (sim.ok_mask(0).to_vec(), sim.ok_mask(distances.len() - 1));
    let only_far = near.iter().zip(far).filter(|(n, f)| !**n && **f).count();
    println!("frames the farthest got but the nearest missed: {only_far}");
    Ok(())
}
