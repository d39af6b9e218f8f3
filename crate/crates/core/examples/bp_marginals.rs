//! One slot of loopy BP on a small network, printing how each node's marginal
//! over {idle, (user, level)} settles across iterations.

use cachelink::bp::{decide, run_bp_traced, BpConfig, FactorMode};
use cachelink::topology::{CachingNode, User};
use cachelink::{sample_channel, NodeDecision, PhyParams, Point, PowerGrid, SlotContext, Topology};

fn label(d: NodeDecision, grid: &PowerGrid) -> String {
    match d {
        NodeDecision::Idle => "idle".into(),
        NodeDecision::Serve { user, level } => format!("u{user}@{}W", grid.level(level)),
    }
}

fn main() -> cachelink::Result<()> {
    let node = |x, y| CachingNode { position: Point::new(x, y), cache: vec![0] };
    let user = |x, y| User { position: Point::new(x, y), requested_file: 0 };
    let topology = Topology::new(
        vec![node(0.0, 0.0), node(140.0, 0.0), node(70.0, 120.0)],
        vec![user(40.0, 10.0), user(100.0, -20.0), user(70.0, 70.0), user(-50.0, 30.0)],
        100.0,
        300.0,
    )?;
    let grid = PowerGrid::uniform(2.0, 2)?;
    let channel = sample_channel(&topology, 3.0, 0, 5)?;
    let backlog = [12, 3, 20, 6];
    let ctx = SlotContext::new(&topology, &channel, &backlog, 1.0, PhyParams::default(), &grid);

    let config = BpConfig { iterations: 8, delta: 1.0, mode: FactorMode::Exact { cap: 1_000_000 } };
    let mut trace = Vec::new();
    let marginals = run_bp_traced(&ctx, &config, Some(&mut trace))?;

    for m in 0..topology.node_count() {
        println!("node {m}");
        for (it, snapshot) in trace.iter().enumerate() {
            let row: Vec<String> = snapshot
                .distribution(m)
                .iter()
                .enumerate()
                .map(|(i, p)| format!("{}={p:.3}", label(snapshot.decision_at(m, i), &grid)))
                .collect();
            println!("  iter {it}: {}", row.join(" "));
        }
    }
    let raw = decide(&marginals);
    println!("argmax decisions: {:?}", raw.0.iter().map(|d| label(*d, &grid)).collect::<Vec<_>>());
    println!("users with several servers: {:?}", raw.conflicted_users());
    Ok(())
}
