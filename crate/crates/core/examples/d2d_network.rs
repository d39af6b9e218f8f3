//! Idle devices caching content for their neighbors, comparing the approximated
//! BP scheduler with the per-cell clustering baseline at two bandwidths.

use cachelink::sim::{self, Scenario, SchedulerKind, SimConfig};

fn main() -> cachelink::Result<()> {
    let mut config = SimConfig { seed: 1, slots: 2000, a_max: 2, scheduler: SchedulerKind::ApproxBpMatching, ..SimConfig::default() };
    config.topology.scenario = Scenario::D2d;
    config.topology.side = 300.0;
    config.bp.delta = 10.0;

    let topology = sim::build_topology(&config)?;
    println!(
        "{} idle devices, {} requesting devices, {} factor-graph edges",
        topology.node_count(),
        topology.user_count(),
        topology.edge_count()
    );

    println!("{:>6}  {:<20} {:>10} {:>9} {:>7}", "MHz", "scheduler", "avg queue", "avg power", "stable");
    for bandwidth in [1e6, 4e6] {
        config.phy.bandwidth_hz = bandwidth;
        for kind in [SchedulerKind::ApproxBpMatching, SchedulerKind::Cluster1] {
            let out = sim::run_on(&SimConfig { scheduler: kind, ..config.clone() }, &topology)?;
            let s = &out.summary;
            println!("{:>6}  {:<20} {:>10.2} {:>9.3} {:>7}", bandwidth / 1e6, kind.name(), s.avg_queue, s.avg_power, s.stability.stable);
        }
    }
    Ok(())
}
