//! Sweeping the penalty weight V trades transmit power against backlog.

use cachelink::sim::{self, SimConfig, SweepParam};

fn main() -> cachelink::Result<()> {
    let mut config = SimConfig { slots: 2000, ..SimConfig::default() };
    config.topology.cache_capacity = 100;
    config.topology.max_users = Some(6);
    config.phy.power_levels = 2;

    let values = [0.1, 0.5, 1.0, 2.0, 5.0];
    let rows = sim::sweep(&config, SweepParam::V, &values, &[1, 2, 3])?;
    println!("{:>5} {:>10} {:>12} {:>9}", "V", "power (W)", "queue/user", "stable");
    for r in &rows {
        println!("{:>5} {:>10.4} {:>12.4} {:>6}/{}", r.value, r.avg_power, r.avg_queue, r.stable_runs, r.runs);
    }
    sim::write_sweep_csv(&rows, std::io::stdout())?;
    Ok(())
}
