//! Per-slot utility of BP plus matching against the exhaustive optimum, tracked
//! through a full run with the oracle evaluated in the shadow.

use cachelink::sim::{self, SimConfig};

fn main() -> cachelink::Result<()> {
    let mut config = SimConfig { seed: 3, slots: 500, shadow_oracle: true, ..SimConfig::default() };
    config.topology.cache_capacity = 100;
    config.topology.max_users = Some(6);
    config.phy.power_levels = 2;

    let out = sim::run_simulation(&config)?;
    let oracle = out.summary.oracle.as_ref().expect("shadow oracle enabled");
    println!(
        "{} slots compared, mean F/F* {:.4}, worst {:.4}, slots above the optimum: {}",
        oracle.slots_compared, oracle.mean_ratio, oracle.min_ratio, oracle.dominance_violations
    );
    let worst = out
        .metrics
        .iter()
        .filter(|m| m.oracle_utility.is_some_and(|f| f > 0.0))
        .min_by(|a, b| (a.utility / a.oracle_utility.unwrap()).total_cmp(&(b.utility / b.oracle_utility.unwrap())));
    if let Some(m) = worst {
        println!("worst slot {}: F = {:.2}, F* = {:.2}, schedule [{}]", m.slot, m.utility, m.oracle_utility.unwrap(), sim::format_decision(&m.decision));
    }
    Ok(())
}
