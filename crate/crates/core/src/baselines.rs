//! Reference schedulers: the exhaustive oracle and two grid-clustering schemes.
//!
//! The clustering schemes split the region into a grid of cells that transmit on
//! orthogonal sub-bands. They expect a [`SlotContext`] already prepared by
//! [`clustered_context`], whose isolation labels remove every cross-cell coupling
//! and whose bandwidth is the per-cell share.

use crate::bp::{decision_support, run_bp, BpConfig};
use crate::error::{Error, Result};
use crate::matching::{link_schedule, NodeOrder};
use crate::objective::{user_utility_parts, Isolation, NodeDecision, ScheduleDecision, SlotContext};
use crate::topology::{Point, Topology};

/// Largest joint decision space the oracle will enumerate.
pub const DEFAULT_SEARCH_CAP: u128 = 10_000_000;

/// `Π_m (L·|V_m| + 1)`, saturating.
pub fn search_space_size(topology: &Topology, levels: usize) -> u128 {
    (0..topology.node_count())
        .map(|m| (levels * topology.signal_users(m).len() + 1) as u128)
        .fold(1u128, |acc, s| acc.saturating_mul(s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub decision: ScheduleDecision,
    pub utility: f64,
    pub evaluated: u128,
}

/// Maximizes the global utility over every joint decision. Among equal maxima the
/// lexicographically smallest decision vector wins (node 0 most significant, idle
/// before serving, then user id, then level).
pub fn exhaustive_search(ctx: &SlotContext<'_>, cap: u128) -> Result<SearchOutcome> {
    let topology = ctx.topology;
    let levels = ctx.grid.len();
    let size = search_space_size(topology, levels);
    if size > cap {
        return Err(Error::SearchSpace { size, cap });
    }
    let supports: Vec<Vec<NodeDecision>> =
        (0..topology.node_count()).map(|m| decision_support(topology, m, levels)).collect();
    let mut digits = vec![0usize; supports.len()];
    let mut current = ScheduleDecision::all_idle(supports.len());
    let mut best = (current.clone(), ctx.global_utility(&current));
    let mut evaluated = 1;
    // odometer with the last node as the fastest digit
    'outer: loop {
        let mut i = supports.len();
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < supports[i].len() {
                current.0[i] = supports[i][digits[i]];
                break;
            }
            digits[i] = 0;
            current.0[i] = NodeDecision::Idle;
        }
        let f = ctx.global_utility(&current);
        evaluated += 1;
        if f > best.1 {
            best = (current.clone(), f);
        }
    }
    Ok(SearchOutcome { decision: best.0, utility: best.1, evaluated })
}

/// Regular grid of rectangular cells covering an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGrid {
    pub origin: Point,
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
}

impl ClusterGrid {
    /// `k x k` cells over the square `[0, side]²`.
    pub fn square(side: f64, k: usize) -> Self {
        Self { origin: Point::new(0.0, 0.0), width: side, height: side, cols: k, rows: k }
    }

    /// `k x k` cells over the bounding box of every node and user.
    pub fn covering(topology: &Topology, k: usize) -> Self {
        let pts = topology
            .nodes()
            .iter()
            .map(|c| c.position)
            .chain(topology.users().iter().map(|u| u.position));
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if x0 > x1 {
            return Self::square(0.0, k);
        }
        Self { origin: Point::new(x0, y0), width: x1 - x0, height: y1 - y0, cols: k, rows: k }
    }

    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Row-major cell index; points outside the box go to the nearest edge cell and
    /// points on an inner boundary belong to the upper cell.
    pub fn cell_of(&self, p: &Point) -> usize {
        let index = |offset: f64, extent: f64, cells: usize| {
            if extent <= 0.0 {
                return 0;
            }
            let i = (offset / extent * cells as f64).floor();
            (i.max(0.0) as usize).min(cells - 1)
        };
        let col = index(p.x - self.origin.x, self.width, self.cols);
        let row = index(p.y - self.origin.y, self.height, self.rows);
        row * self.cols + col
    }

    pub fn isolation(&self, topology: &Topology) -> Isolation {
        Isolation {
            node_label: topology.nodes().iter().map(|c| self.cell_of(&c.position)).collect(),
            user_label: topology.users().iter().map(|u| self.cell_of(&u.position)).collect(),
        }
    }
}

/// Narrows `ctx` to per-cell operation: bandwidth divided by the cell count and no
/// coupling between pairs in different cells.
pub fn clustered_context<'a>(ctx: &SlotContext<'a>, isolation: &'a Isolation, cells: usize) -> SlotContext<'a> {
    let phy = ctx.phy.with_bandwidth(ctx.phy.bandwidth_hz / cells as f64);
    SlotContext { phy, ..*ctx }.with_isolation(isolation)
}

fn labels<'a>(ctx: &SlotContext<'a>) -> &'a Isolation {
    ctx.isolation.expect("clustering schedulers need a clustered context")
}

/// At most one active link per cell: the single (node, user, level) with both ends
/// in the cell that maximizes the cell's utility, or nothing if no link beats idling.
pub fn clustering_schedule_1(ctx: &SlotContext<'_>) -> ScheduleDecision {
    let topology = ctx.topology;
    let iso = labels(ctx);
    let mut best: Vec<Option<(f64, usize, usize, usize)>> = Vec::new();
    for m in 0..topology.node_count() {
        let cell = iso.node_label[m];
        if best.len() <= cell {
            best.resize(cell + 1, None);
        }
        for &n in topology.signal_users(m) {
            if !iso.coupled(m, n) {
                continue;
            }
            for l in 0..ctx.grid.len() {
                let p = ctx.grid.level(l);
                let f = user_utility_parts(&ctx.phy, ctx.backlog[n], ctx.v, 1, ctx.channel.gain(m, n) * p, p, 0.0);
                let floor = best[cell].map_or(0.0, |b| b.0);
                if f > floor {
                    best[cell] = Some((f, m, n, l));
                }
            }
        }
    }
    let mut decision = ScheduleDecision::all_idle(topology.node_count());
    for (_, m, n, l) in best.into_iter().flatten() {
        decision.0[m] = NodeDecision::Serve { user: n, level: l };
    }
    decision
}

/// BP followed by matching inside every cell on its own, over the cell's nodes,
/// users and intra-cell edges only.
pub fn clustering_schedule_2(ctx: &SlotContext<'_>, config: &BpConfig, order: NodeOrder) -> Result<ScheduleDecision> {
    let topology = ctx.topology;
    let iso = labels(ctx);
    let cells = iso.node_label.iter().chain(&iso.user_label).copied().max().map_or(0, |c| c + 1);
    let mut decision = ScheduleDecision::all_idle(topology.node_count());
    for cell in 0..cells {
        let nodes: Vec<usize> = (0..topology.node_count()).filter(|&m| iso.node_label[m] == cell).collect();
        let users: Vec<usize> = (0..topology.user_count()).filter(|&n| iso.user_label[n] == cell).collect();
        if nodes.is_empty() || users.is_empty() {
            continue;
        }
        let sub = topology.restrict(&nodes, &users)?;
        let channel = ctx.channel.restrict(&nodes, &users);
        let backlog: Vec<u64> = users.iter().map(|&n| ctx.backlog[n]).collect();
        let sub_ctx = SlotContext::new(&sub, &channel, &backlog, ctx.v, ctx.phy, ctx.grid);
        let marginals = run_bp(&sub_ctx, config)?;
        let outcome = link_schedule(&sub_ctx, &marginals, order);
        for (i, d) in outcome.decision.0.into_iter().enumerate() {
            if let NodeDecision::Serve { user, level } = d {
                decision.0[nodes[i]] = NodeDecision::Serve { user: users[user], level };
            }
        }
    }
    Ok(decision)
}
