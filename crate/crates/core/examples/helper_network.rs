//! Three fixed helpers serving users around them, scheduled by BP plus matching.
//!
//! ```sh
//! cargo run --release --example helper_network -- 7
//! ```

use cachelink::sim::{self, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let mut config = SimConfig { seed, slots: 1500, ..SimConfig::default() };
    config.topology.cache_capacity = 100;
    config.topology.max_users = Some(8);

    let out = sim::run_simulation(&config)?;
    let s = &out.summary;
    println!("{} helpers, {} users (seed {seed})", s.nodes, s.users);
    for (m, node) in out.topology.nodes().iter().enumerate() {
        println!("  helper {m} at ({:7.1}, {:7.1}) can serve {:?}", node.position.x, node.position.y, out.topology.signal_users(m));
    }
    println!("average backlog   {:8.3} chunks/user", s.avg_queue);
    println!("average power     {:8.3} W", s.avg_power);
    println!("active links/slot {:8.3}", s.avg_active_links);
    println!("mean wait         {:8.3} slots", s.mean_wait);
    println!("stable            {}", s.stability.stable);

    let last = out.metrics.last().expect("at least one slot");
    println!("last schedule: {}", sim::format_decision(&last.decision));
    Ok(())
}
