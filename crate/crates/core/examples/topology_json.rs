//! Generating a scenario, saving it as JSON, and simulating the saved file.

use cachelink::sim::{self, Scenario, SimConfig};
use cachelink::Topology;

fn main() -> cachelink::Result<()> {
    let mut config = SimConfig { seed: 12, slots: 300, ..SimConfig::default() };
    config.topology.scenario = Scenario::D2d;
    config.topology.side = 250.0;
    let topology = sim::build_topology(&config)?;

    let path = std::env::temp_dir().join("cachelink_scenario.json");
    std::fs::write(&path, topology.to_json()?)?;
    println!("wrote {} ({} nodes, {} users)", path.display(), topology.node_count(), topology.user_count());

    let reloaded = Topology::from_json(&std::fs::read_to_string(&path)?)?;
    assert_eq!(reloaded, topology);
    for n in 0..reloaded.user_count() {
        println!("user {n}: servers {:?}, interferers {:?}", reloaded.servers(n), reloaded.interferers(n));
    }

    config.topology.file = Some(path);
    let out = sim::run_simulation(&config)?;
    println!("avg queue {:.3}, avg power {:.3} W", out.summary.avg_queue, out.summary.avg_power);
    Ok(())
}
