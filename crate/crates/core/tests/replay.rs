//! The logged schedule, backlog and channel dump are enough to recompute a slot's utility.

use cachelink::channel::ChannelRealization;
use cachelink::sim::{self, parse_decision, SimConfig};
use cachelink::{SlotContext, Topology};

#[test]
fn utility_recomputes_from_logged_artifacts() {
    let slot = 7;
    let mut cfg = SimConfig { seed: 11, slots: 20, ..SimConfig::default() };
    cfg.topology.max_users = Some(6);
    cfg.dump.channel_slot = Some(slot);
    let out = sim::run_simulation(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    sim::write_outputs(&out, dir.path()).unwrap();

    let topology = Topology::from_json(&std::fs::read_to_string(dir.path().join("topology.json")).unwrap()).unwrap();
    let mut channel = ChannelRealization::zeros(topology.node_count(), topology.user_count(), slot);
    let mut rows = csv::Reader::from_path(dir.path().join(format!("channel_t{slot}.csv"))).unwrap();
    for rec in rows.deserialize::<(usize, usize, f64, f64)>() {
        let (m, n, _, gain) = rec.unwrap();
        channel.set(m, n, gain);
    }

    let mut metrics = csv::Reader::from_path(dir.path().join("metrics.csv")).unwrap();
    let header = metrics.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let row = metrics.records().map(Result::unwrap).find(|r| r[0] == *slot.to_string()).unwrap();
    let backlog: Vec<u64> = (0..topology.user_count()).map(|n| row[col(&format!("q{n}"))].parse().unwrap()).collect();
    let decision = parse_decision(&row[col("schedule")], topology.node_count()).unwrap();
    let logged: f64 = row[col("utility")].parse().unwrap();

    let grid = cfg.phy.grid().unwrap();
    let ctx = SlotContext::new(&topology, &channel, &backlog, cfg.v, cfg.phy.params(), &grid);
    assert_eq!(ctx.global_utility(&decision), logged);
    assert_eq!(decision, out.metrics[slot as usize].decision);
}
