//! Two nodes whose BP argmax both pick the middle user. The matching step turns
//! that many-to-one outcome into a one-to-one schedule.

use cachelink::bp::{decide, run_bp, BpConfig, FactorMode};
use cachelink::matching::{link_schedule, NodeOrder};
use cachelink::sim::format_decision;
use cachelink::topology::{CachingNode, User};
use cachelink::{sample_channel, PhyParams, Point, PowerGrid, SlotContext, Topology};

fn main() -> cachelink::Result<()> {
    let node = |x| CachingNode { position: Point::new(x, 0.0), cache: vec![0] };
    let user = |x| User { position: Point::new(x, 0.0), requested_file: 0 };
    let topology = Topology::new(vec![node(0.0), node(150.0)], vec![user(-60.0), user(75.0), user(210.0)], 100.0, 300.0)?;
    let grid = PowerGrid::uniform(2.0, 1)?;
    let backlog = [10, 20, 10];
    let config = BpConfig { iterations: 10, delta: 0.1, mode: FactorMode::Exact { cap: 1_000_000 } };

    for draw in 0..8 {
        let channel = sample_channel(&topology, 3.0, draw, 0xc6)?;
        let ctx = SlotContext::new(&topology, &channel, &backlog, 1.0, PhyParams::default(), &grid);
        let marginals = run_bp(&ctx, &config)?;
        let raw = decide(&marginals);
        let fixed = link_schedule(&ctx, &marginals, NodeOrder::Ascending);
        println!(
            "draw {draw}: raw [{}] F={:8.2} conflicts {:?}  ->  matched [{}] F={:8.2} ({} proposals)",
            format_decision(&raw),
            ctx.global_utility(&raw),
            raw.conflicted_users(),
            format_decision(&fixed.decision),
            fixed.utility,
            fixed.proposals
        );
    }
    Ok(())
}
