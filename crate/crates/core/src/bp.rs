//! Loopy belief propagation over the node/user factor graph.
//!
//! Caching nodes are variables whose states are the node's decision support
//! `{Idle} ∪ {(n, l) : n ∈ V_m, l ∈ 1..L}`; users are factors `exp(δ f_n)` over the
//! decisions of their interferers `H_n`. Messages live in the log domain.
//!
//! A user's utility depends on a neighbor's decision only through its role towards
//! that user: idle, serving it at some level, or serving someone else (interfering)
//! at some level. Factor updates therefore marginalize each incoming message onto
//! these `2L + 1` roles before enumerating the joint configurations, which is exact
//! and much cheaper than enumerating full supports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{user_utility_parts, NodeDecision, ScheduleDecision, SlotContext};
use crate::topology::Topology;

/// Default cap on joint role configurations enumerated per factor message.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorMode {
    /// Exact expectation over every other neighbor of the user.
    Exact { cap: u128 },
    /// Exact expectation over the `neighborhood` nodes nearest to the user; every
    /// other neighbor contributes its mean transmit power as fixed interference.
    Approximate { neighborhood: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct BpConfig {
    pub iterations: usize,
    /// Inverse temperature δ of `p ∝ exp(δ F)`.
    pub delta: f64,
    pub mode: FactorMode,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self { iterations: 10, delta: 1.0, mode: FactorMode::Exact { cap: DEFAULT_ENUMERATION_CAP } }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("BP needs at least one iteration".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("BP temperature must be > 0, got {}", self.delta)));
        }
        if let FactorMode::Approximate { neighborhood: 0 } = self.mode {
            return Err(Error::Config("approximate BP needs a neighborhood of at least one node".into()));
        }
        Ok(())
    }
}

/// Ordered decision support of node m: `Idle`, then `(n, l)` by user id and level.
pub fn decision_support(topology: &Topology, m: usize, levels: usize) -> Vec<NodeDecision> {
    let mut out = Vec::with_capacity(1 + levels * topology.signal_users(m).len());
    out.push(NodeDecision::Idle);
    for &user in topology.signal_users(m) {
        out.extend((0..levels).map(|level| NodeDecision::Serve { user, level }));
    }
    out
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Shifts `xs` so that `Σ exp(xs) = 1`. Returns false if the vector carries no mass.
pub(crate) fn log_normalize(xs: &mut [f64]) -> bool {
    let z = log_sum_exp(xs);
    if !z.is_finite() {
        return false;
    }
    xs.iter_mut().for_each(|x| *x -= z);
    true
}

fn uniform_log(len: usize) -> Vec<f64> {
    vec![-(len as f64).ln(); len]
}

/// Log-domain messages on every edge `(m, n)` with `n ∈ U_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefTable {
    supports: Vec<Vec<NodeDecision>>,
    /// `to_user[m][k]` is `log p_{n←m}` for `n = U_m[k]`.
    to_user: Vec<Vec<Vec<f64>>>,
    /// `to_node[m][k]` is `log p_{n→m}` for `n = U_m[k]`.
    to_node: Vec<Vec<Vec<f64>>>,
    /// `slot_of[n][j]` is the position of n in `U_k` for `k = H_n[j]`.
    slot_of: Vec<Vec<usize>>,
    pub iteration: usize,
}

/// Uniform node-to-user messages `1 / (L·|V_m| + 1)` on every edge.
pub fn init_messages(topology: &Topology, levels: usize) -> BeliefTable {
    let supports: Vec<Vec<NodeDecision>> = (0..topology.node_count())
        .map(|m| decision_support(topology, m, levels))
        .collect();
    let to_user: Vec<Vec<Vec<f64>>> = (0..topology.node_count())
        .map(|m| vec![uniform_log(supports[m].len()); topology.interference_users(m).len()])
        .collect();
    let to_node = to_user.clone();
    let slot_of = (0..topology.user_count())
        .map(|n| {
            topology
                .interferers(n)
                .iter()
                .map(|&k| {
                    topology
                        .interference_users(k)
                        .binary_search(&n)
                        .expect("neighbor sets are symmetric")
                })
                .collect()
        })
        .collect();
    BeliefTable { supports, to_user, to_node, slot_of, iteration: 1 }
}

impl BeliefTable {
    pub fn support(&self, m: usize) -> &[NodeDecision] {
        &self.supports[m]
    }

    /// `p_{n←m}` as probabilities, `n = U_m[k]`.
    pub fn node_to_user(&self, m: usize, k: usize) -> Vec<f64> {
        self.to_user[m][k].iter().map(|x| x.exp()).collect()
    }

    /// `p_{n→m}` as probabilities, `n = U_m[k]`.
    pub fn user_to_node(&self, m: usize, k: usize) -> Vec<f64> {
        self.to_node[m][k].iter().map(|x| x.exp()).collect()
    }

    /// Overwrites `log p_{n←m}` (used by tests and custom schedules).
    pub fn set_node_to_user(&mut self, m: usize, k: usize, probs: &[f64]) {
        self.to_user[m][k] = probs.iter().map(|p| p.ln()).collect();
    }

    /// Normalized product of every incoming user message at node m.
    fn log_marginal(&self, m: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.supports[m].len()];
        for msg in &self.to_node[m] {
            acc.iter_mut().zip(msg).for_each(|(a, b)| *a += b);
        }
        if !log_normalize(&mut acc) {
            log::warn!("node {m}: marginal underflowed, using uniform");
            acc = uniform_log(acc.len());
        }
        acc
    }

    pub fn marginals(&self, topology: &Topology, levels: usize) -> Marginals {
        let probs = (0..self.supports.len())
            .map(|m| self.log_marginal(m).into_iter().map(f64::exp).collect())
            .collect();
        Marginals::new(topology, levels, probs)
    }
}

/// A neighbor's role towards one user: idle, serving it, or interfering.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Idle,
    Serve(f64),
    Interfere(f64),
}

/// Role distribution of one neighbor with respect to user n.
struct RoleMessage {
    gain: f64,
    /// `(role, log probability)` with only reachable roles listed.
    roles: Vec<(Role, f64)>,
}

fn role_of(decision: NodeDecision, n: usize, ctx: &SlotContext<'_>) -> (usize, Role) {
    let levels = ctx.grid.len();
    match decision {
        NodeDecision::Idle => (0, Role::Idle),
        NodeDecision::Serve { user, level } if user == n => (1 + level, Role::Serve(ctx.grid.level(level))),
        NodeDecision::Serve { level, .. } => (1 + levels + level, Role::Interfere(ctx.grid.level(level))),
    }
}

/// Marginalizes a log message over m's support onto its roles towards n.
/// Unreachable roles are dropped; roles with zero mass are kept so the enumeration
/// size only depends on the topology.
fn role_message(support: &[NodeDecision], log_msg: &[f64], n: usize, gain: f64, ctx: &SlotContext<'_>) -> RoleMessage {
    let slots = 1 + 2 * ctx.grid.len();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); slots];
    let mut role_at: Vec<Option<Role>> = vec![None; slots];
    for (d, &lp) in support.iter().zip(log_msg) {
        let (idx, role) = role_of(*d, n, ctx);
        buckets[idx].push(lp);
        role_at[idx] = Some(role);
    }
    let roles = role_at
        .into_iter()
        .zip(buckets)
        .filter_map(|(role, b)| role.map(|r| (r, log_sum_exp(&b))))
        .collect();
    RoleMessage { gain, roles }
}

/// Running aggregate of the roles chosen so far during enumeration.
#[derive(Clone, Copy)]
struct Acc {
    log_p: f64,
    servers: usize,
    received: f64,
    server_power: f64,
    interference: f64,
}

impl Acc {
    fn with(self, gain: f64, role: Role, log_p: f64) -> Self {
        let mut a = self;
        a.log_p += log_p;
        match role {
            Role::Idle => {}
            Role::Serve(p) => {
                a.servers += 1;
                a.received += gain * p;
                a.server_power += p;
            }
            Role::Interfere(p) => a.interference += gain * p,
        }
        a
    }
}

fn enumerate(others: &[&RoleMessage], acc: Acc, eval: &mut impl FnMut(&Acc)) {
    match others.split_first() {
        None => eval(&acc),
        Some((head, tail)) => {
            for &(role, lp) in &head.roles {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                enumerate(tail, acc.with(head.gain, role, lp), eval);
            }
        }
    }
}

/// Neighbors of n whose messages the factor update enumerates exactly, as
/// positions into `H_n`; everything else is summarized by mean power.
fn exact_set(ctx: &SlotContext<'_>, n: usize, hood: &[usize], mode: FactorMode) -> Vec<usize> {
    match mode {
        FactorMode::Exact { .. } => (0..hood.len()).collect(),
        FactorMode::Approximate { neighborhood } => {
            let mut by_distance: Vec<usize> = (0..hood.len()).collect();
            by_distance.sort_by(|&a, &b| {
                ctx.topology
                    .distance(hood[a], n)
                    .total_cmp(&ctx.topology.distance(hood[b], n))
                    .then(hood[a].cmp(&hood[b]))
            });
            by_distance.truncate(neighborhood);
            by_distance.sort_unstable();
            by_distance
        }
    }
}

/// Mean transmit power `Σ_l Pr{q = P_l}·P_l` under a log message.
pub(crate) fn mean_power(support: &[NodeDecision], log_msg: &[f64], ctx: &SlotContext<'_>) -> f64 {
    support
        .iter()
        .zip(log_msg)
        .map(|(d, lp)| lp.exp() * d.power(ctx.grid))
        .sum()
}

/// Messages `log p_{n→m}` from user n to every `m ∈ H_n`, in `H_n` order.
pub fn factor_update(
    n: usize,
    table: &BeliefTable,
    ctx: &SlotContext<'_>,
    delta: f64,
    mode: FactorMode,
) -> Result<Vec<Vec<f64>>> {
    let hood: Vec<usize> = ctx
        .topology
        .interferers(n)
        .iter()
        .copied()
        .filter(|&k| ctx.isolation.is_none_or(|iso| iso.coupled(k, n)))
        .collect();
    let all_hood = ctx.topology.interferers(n);
    let pos_in_all = |k: usize| all_hood.binary_search(&k).expect("subset of H_n");

    let roles: Vec<RoleMessage> = hood
        .iter()
        .map(|&k| {
            let slot = table.slot_of[n][pos_in_all(k)];
            role_message(&table.supports[k], &table.to_user[k][slot], n, ctx.channel.gain(k, n), ctx)
        })
        .collect();
    let exact = exact_set(ctx, n, &hood, mode);
    let backlog = ctx.backlog[n];

    let mut out = vec![Vec::new(); all_hood.len()];
    for (j, &m) in hood.iter().enumerate() {
        let others: Vec<usize> = exact.iter().copied().filter(|&i| i != j).collect();
        if let FactorMode::Exact { cap } = mode {
            let size: u128 = others.iter().map(|&i| roles[i].roles.len() as u128).product();
            if size > cap {
                return Err(Error::EnumerationCap { user: n, size, cap });
            }
        }
        let fixed_interference: f64 = (0..hood.len())
            .filter(|i| *i != j && !exact.contains(i))
            .map(|i| {
                let k = hood[i];
                let slot = table.slot_of[n][pos_in_all(k)];
                ctx.channel.gain(k, n) * mean_power(&table.supports[k], &table.to_user[k][slot], ctx)
            })
            .sum();
        let other_roles: Vec<&RoleMessage> = others.iter().map(|&i| &roles[i]).collect();

        // value per role of m, then spread over m's support
        let mut per_role: Vec<(Role, f64)> = Vec::with_capacity(roles[j].roles.len());
        for &(role, _) in &roles[j].roles {
            let start = Acc { log_p: 0.0, servers: 0, received: 0.0, server_power: 0.0, interference: fixed_interference }
                .with(roles[j].gain, role, 0.0);
            let mut terms = Vec::new();
            enumerate(&other_roles, start, &mut |a| {
                let f = user_utility_parts(&ctx.phy, backlog, ctx.v, a.servers, a.received, a.server_power, a.interference);
                terms.push(a.log_p + delta * f);
            });
            per_role.push((role, log_sum_exp(&terms)));
        }
        let mut msg: Vec<f64> = table.supports[m]
            .iter()
            .map(|d| {
                let (_, role) = role_of(*d, n, ctx);
                per_role
                    .iter()
                    .find(|(r, _)| *r == role)
                    .map(|(_, v)| *v)
                    .expect("every support role is reachable")
            })
            .collect();
        if !log_normalize(&mut msg) {
            log::warn!("factor {n} -> node {m}: message underflowed, using uniform");
            msg = uniform_log(msg.len());
        }
        out[pos_in_all(m)] = msg;
    }
    // neighbors outside the isolation label get an uninformative message
    for (j, &m) in all_hood.iter().enumerate() {
        if out[j].is_empty() {
            out[j] = uniform_log(table.supports[m].len());
        }
    }
    Ok(out)
}

/// Approximate factor update keeping `neighborhood` nearest nodes exact.
pub fn approx_factor_update(
    n: usize,
    table: &BeliefTable,
    ctx: &SlotContext<'_>,
    delta: f64,
    neighborhood: usize,
) -> Result<Vec<Vec<f64>>> {
    factor_update(n, table, ctx, delta, FactorMode::Approximate { neighborhood })
}

/// Messages `log p_{n←m}` from node m to every `n ∈ U_m`, in `U_m` order: the
/// normalized product of the other incoming user messages.
pub fn variable_update(m: usize, table: &BeliefTable) -> Vec<Vec<f64>> {
    let incoming = &table.to_node[m];
    let len = table.supports[m].len();
    (0..incoming.len())
        .map(|k| {
            let mut acc = vec![0.0; len];
            for (j, msg) in incoming.iter().enumerate() {
                if j != k {
                    acc.iter_mut().zip(msg).for_each(|(a, b)| *a += b);
                }
            }
            if !log_normalize(&mut acc) {
                log::warn!("node {m}: outgoing message underflowed, using uniform");
                acc = uniform_log(len);
            }
            acc
        })
        .collect()
}

/// Per-node marginal distributions over decision supports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    levels: usize,
    /// `V_m` for each node, fixing the support layout.
    users: Vec<Vec<usize>>,
    probs: Vec<Vec<f64>>,
}

impl Marginals {
    /// `probs[m]` must follow [`decision_support`] order.
    pub fn new(topology: &Topology, levels: usize, probs: Vec<Vec<f64>>) -> Self {
        let users: Vec<Vec<usize>> = (0..topology.node_count())
            .map(|m| topology.signal_users(m).to_vec())
            .collect();
        for (m, p) in probs.iter().enumerate() {
            assert_eq!(p.len(), 1 + levels * users[m].len(), "node {m}: support size");
        }
        Self { levels, users, probs }
    }

    pub fn node_count(&self) -> usize {
        self.probs.len()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `V_m` in support order.
    pub fn signal_users(&self, m: usize) -> &[usize] {
        &self.users[m]
    }

    pub fn distribution(&self, m: usize) -> &[f64] {
        &self.probs[m]
    }

    pub fn idle_mass(&self, m: usize) -> f64 {
        self.probs[m][0]
    }

    /// `P_mnl`; zero when n is not a signal neighbor of m.
    pub fn mass(&self, m: usize, n: usize, level: usize) -> f64 {
        match self.users[m].binary_search(&n) {
            Ok(i) => self.probs[m][1 + i * self.levels + level],
            Err(_) => 0.0,
        }
    }

    /// `max_l P_mnl`
    pub fn user_mass(&self, m: usize, n: usize) -> f64 {
        (0..self.levels).map(|l| self.mass(m, n, l)).fold(0.0, f64::max)
    }

    pub fn decision_at(&self, m: usize, index: usize) -> NodeDecision {
        if index == 0 {
            NodeDecision::Idle
        } else {
            let i = index - 1;
            NodeDecision::Serve { user: self.users[m][i / self.levels], level: i % self.levels }
        }
    }
}

/// Runs `iterations` synchronous rounds (all factor updates from the current node
/// messages, then all variable updates) and returns the per-node marginals.
pub fn run_bp(ctx: &SlotContext<'_>, config: &BpConfig) -> Result<Marginals> {
    run_bp_traced(ctx, config, None)
}

/// Like [`run_bp`], additionally recording the marginals after every iteration.
pub fn run_bp_traced(ctx: &SlotContext<'_>, config: &BpConfig, mut trace: Option<&mut Vec<Marginals>>) -> Result<Marginals> {
    config.validate()?;
    let topology = ctx.topology;
    let levels = ctx.grid.len();
    let mut table = init_messages(topology, levels);
    for i in 0..config.iterations {
        let mut fresh: Vec<Vec<Vec<f64>>> = (0..topology.node_count())
            .map(|m| vec![Vec::new(); topology.interference_users(m).len()])
            .collect();
        for n in 0..topology.user_count() {
            let msgs = factor_update(n, &table, ctx, config.delta, config.mode)?;
            for (j, (&m, msg)) in topology.interferers(n).iter().zip(msgs).enumerate() {
                fresh[m][table.slot_of[n][j]] = msg;
            }
        }
        table.to_node = fresh;
        if let Some(t) = trace.as_deref_mut() {
            t.push(table.marginals(topology, levels));
        }
        if i + 1 < config.iterations {
            let next: Vec<Vec<Vec<f64>>> = (0..topology.node_count()).map(|m| variable_update(m, &table)).collect();
            table.to_user = next;
            table.iteration += 1;
        }
    }
    Ok(table.marginals(topology, levels))
}

/// Per-node most probable decision: the best `(n, l)` if its mass strictly exceeds
/// the idle mass, otherwise idle. May assign one user to several nodes.
pub fn decide(marginals: &Marginals) -> ScheduleDecision {
    ScheduleDecision(
        (0..marginals.node_count())
            .map(|m| {
                let p = marginals.distribution(m);
                let mut best = 0;
                for i in 1..p.len() {
                    if best == 0 || p[i] > p[best] {
                        best = i;
                    }
                }
                if best != 0 && p[best] > p[0] {
                    marginals.decision_at(m, best)
                } else {
                    NodeDecision::Idle
                }
            })
            .collect(),
    )
}
