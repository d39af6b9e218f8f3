//! Interference-limited link rates and the per-slot drift-plus-penalty utility
//!
//! ```text
//! F = Σ_n f_n,   f_n = Q_n·μ_n − V·Σ_{m ∈ H_n} q_m·x_mn
//! ```
//!
//! `f_n` is zero whenever user n has no server or more than one server in the same
//! slot. Every scheduler in the crate scores decisions through [`SlotContext`].

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{config_err, Result};
use crate::queueing::chunk_capacity;
use crate::topology::Topology;

/// Discrete transmit power levels `P_1 < ... < P_L`, all within `q_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    levels: Vec<f64>,
    q_max: f64,
}

impl PowerGrid {
    pub fn new(levels: Vec<f64>, q_max: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(config_err("power grid needs at least one level"));
        }
        if !(levels[0] > 0.0) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err(format!("power levels must be positive and increasing: {levels:?}")));
        }
        if levels[levels.len() - 1] > q_max {
            return Err(config_err(format!("top power level exceeds q_max = {q_max}")));
        }
        Ok(Self { levels, q_max })
    }

    /// `P_l = l * q_max / count` for `l = 1..=count`.
    pub fn uniform(q_max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(config_err("power grid needs at least one level"));
        }
        Self::new((1..=count).map(|l| l as f64 * q_max / count as f64).collect(), q_max)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Power of zero-based level index `level`.
    #[inline]
    pub fn level(&self, level: usize) -> f64 {
        self.levels[level]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }
}

/// Physical-layer constants shared by rate and service computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyParams {
    pub bandwidth_hz: f64,
    pub noise_power: f64,
    /// Slot (coherence) duration in seconds.
    pub slot_seconds: f64,
    pub chunk_bits: f64,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self { bandwidth_hz: 10e6, noise_power: 1e-8, slot_seconds: 0.01, chunk_bits: 20_000.0 }
    }
}

impl PhyParams {
    pub fn with_bandwidth(self, bandwidth_hz: f64) -> Self {
        Self { bandwidth_hz, ..self }
    }

    pub fn rate(&self, received: f64, interference: f64) -> f64 {
        self.bandwidth_hz * (1.0 + received / (interference + self.noise_power)).log2()
    }

    pub fn chunks(&self, rate: f64) -> u64 {
        chunk_capacity(rate, self.slot_seconds, self.chunk_bits)
    }
}

/// Per-node schedule entry. `level` indexes the [`PowerGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeDecision {
    Idle,
    Serve { user: usize, level: usize },
}

impl NodeDecision {
    pub fn served_user(&self) -> Option<usize> {
        match *self {
            NodeDecision::Idle => None,
            NodeDecision::Serve { user, .. } => Some(user),
        }
    }

    pub fn power(&self, grid: &PowerGrid) -> f64 {
        match *self {
            NodeDecision::Idle => 0.0,
            NodeDecision::Serve { level, .. } => grid.level(level),
        }
    }
}

/// One decision per caching node; a node serves at most one user by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScheduleDecision(pub Vec<NodeDecision>);

impl ScheduleDecision {
    pub fn all_idle(nodes: usize) -> Self {
        Self(vec![NodeDecision::Idle; nodes])
    }

    pub fn node_count(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, m: usize) -> NodeDecision {
        self.0[m]
    }

    pub fn total_power(&self, grid: &PowerGrid) -> f64 {
        self.0.iter().map(|d| d.power(grid)).fold(0.0, |a, p| a + p)
    }

    pub fn active_links(&self) -> usize {
        self.0.iter().filter(|d| d.served_user().is_some()).count()
    }

    /// Users that more than one node tries to serve, ascending.
    pub fn conflicted_users(&self) -> Vec<usize> {
        let mut served: Vec<usize> = self.0.iter().filter_map(NodeDecision::served_user).collect();
        served.sort_unstable();
        let mut out: Vec<usize> = served.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
        out.dedup();
        out
    }

    /// Checks that every served user is a signal neighbor and every level exists.
    pub fn validate(&self, topology: &Topology, grid: &PowerGrid) -> Result<()> {
        if self.0.len() != topology.node_count() {
            return Err(config_err(format!(
                "decision covers {} nodes, topology has {}",
                self.0.len(),
                topology.node_count()
            )));
        }
        for (m, d) in self.0.iter().enumerate() {
            if let NodeDecision::Serve { user, level } = *d {
                if !topology.is_signal_pair(m, user) {
                    return Err(config_err(format!("node {m} cannot serve user {user}")));
                }
                if level >= grid.len() {
                    return Err(config_err(format!("node {m}: power level {level} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// Spatial partition with orthogonal bands: a node affects a user only when both
/// carry the same label.
#[derive(Debug, Clone, PartialEq)]
pub struct Isolation {
    pub node_label: Vec<usize>,
    pub user_label: Vec<usize>,
}

impl Isolation {
    #[inline]
    pub fn coupled(&self, m: usize, n: usize) -> bool {
        self.node_label[m] == self.user_label[n]
    }
}

/// Utility of one user from already aggregated link quantities.
#[inline]
pub(crate) fn user_utility_parts(
    phy: &PhyParams,
    backlog: u64,
    v: f64,
    servers: usize,
    received: f64,
    server_power: f64,
    interference: f64,
) -> f64 {
    // several simultaneous servers deliver nothing but still spend their power
    let mu = if servers == 1 { phy.chunks(phy.rate(received, interference)).min(backlog) } else { 0 };
    backlog as f64 * mu as f64 - v * server_power
}

/// Everything needed to score a schedule in one slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotContext<'a> {
    pub topology: &'a Topology,
    pub channel: &'a ChannelRealization,
    pub backlog: &'a [u64],
    pub v: f64,
    pub phy: PhyParams,
    pub grid: &'a PowerGrid,
    pub isolation: Option<&'a Isolation>,
}

/// Aggregated view of user n under a decision.
struct Reception {
    servers: usize,
    received: f64,
    server_power: f64,
    interference: f64,
}

impl<'a> SlotContext<'a> {
    pub fn new(
        topology: &'a Topology,
        channel: &'a ChannelRealization,
        backlog: &'a [u64],
        v: f64,
        phy: PhyParams,
        grid: &'a PowerGrid,
    ) -> Self {
        Self { topology, channel, backlog, v, phy, grid, isolation: None }
    }

    pub fn with_isolation(self, isolation: &'a Isolation) -> Self {
        Self { isolation: Some(isolation), ..self }
    }

    fn reception(&self, n: usize, decision: &ScheduleDecision) -> Reception {
        let mut r = Reception { servers: 0, received: 0.0, server_power: 0.0, interference: 0.0 };
        for &k in self.topology.interferers(n) {
            if self.isolation.is_some_and(|iso| !iso.coupled(k, n)) {
                continue;
            }
            if let NodeDecision::Serve { user, level } = decision.get(k) {
                let p = self.grid.level(level);
                let rx = self.channel.gain(k, n) * p;
                if user == n {
                    r.servers += 1;
                    r.received += rx;
                    r.server_power += p;
                } else {
                    r.interference += rx;
                }
            }
        }
        r
    }

    /// Achievable rate of user n in bits/s; zero without exactly one server.
    pub fn user_rate(&self, n: usize, decision: &ScheduleDecision) -> f64 {
        let r = self.reception(n, decision);
        if r.servers == 1 {
            self.phy.rate(r.received, r.interference)
        } else {
            0.0
        }
    }

    /// `f_n`. When two or more nodes serve n at once, n receives nothing and the
    /// utility is minus the penalty on their combined power.
    pub fn per_user_utility(&self, n: usize, decision: &ScheduleDecision) -> f64 {
        let r = self.reception(n, decision);
        user_utility_parts(
            &self.phy,
            self.backlog[n],
            self.v,
            r.servers,
            r.received,
            r.server_power,
            r.interference,
        )
    }

    /// `F = Σ_n f_n`, the quantity every scheduler maximizes.
    pub fn global_utility(&self, decision: &ScheduleDecision) -> f64 {
        (0..self.topology.user_count())
            .map(|n| self.per_user_utility(n, decision))
            .fold(0.0, |a, f| a + f)
    }

    pub fn rates(&self, decision: &ScheduleDecision) -> Vec<f64> {
        (0..self.topology.user_count()).map(|n| self.user_rate(n, decision)).collect()
    }

    /// `μ_n = min(floor(τ R_n / S), Q_n)` for every user.
    pub fn served_chunks(&self, decision: &ScheduleDecision) -> Vec<u64> {
        (0..self.topology.user_count())
            .map(|n| self.phy.chunks(self.user_rate(n, decision)).min(self.backlog[n]))
            .collect()
    }
}
