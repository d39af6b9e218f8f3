//! One-to-one repair of BP output.
//!
//! Nodes take turns proposing to users in order of their BP preference. A proposal
//! to a user that is already matched displaces the holder, which re-proposes down
//! its own list along a chain that never revisits a user. The resulting candidate
//! matching replaces the current one only if it strictly raises the global utility.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::bp::Marginals;
use crate::objective::{NodeDecision, ScheduleDecision, SlotContext};
use crate::rng::{stream, TAG_MATCH_ORDER};
use crate::topology::Topology;

/// Partial one-to-one assignment between caching nodes and users, with the power
/// level of every matched node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    node_user: Vec<Option<usize>>,
    user_node: Vec<Option<usize>>,
    level: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(nodes: usize, users: usize) -> Self {
        Self { node_user: vec![None; nodes], user_node: vec![None; users], level: vec![None; nodes] }
    }

    /// `Ψ(c_m)`
    pub fn user_of(&self, m: usize) -> Option<usize> {
        self.node_user[m]
    }

    /// `Ψ⁻¹(u_n)`
    pub fn node_of(&self, n: usize) -> Option<usize> {
        self.user_node[n]
    }

    pub fn level_of(&self, m: usize) -> Option<usize> {
        self.level[m]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.node_user.iter().enumerate().filter_map(|(m, u)| u.map(|n| (m, n)))
    }

    pub fn len(&self) -> usize {
        self.node_user.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unmatch_node(&mut self, m: usize) {
        if let Some(n) = self.node_user[m].take() {
            self.user_node[n] = None;
        }
        self.level[m] = None;
    }

    /// Matches m to n, releasing whatever either side held before.
    pub fn assign(&mut self, m: usize, n: usize, level: usize) {
        self.unmatch_node(m);
        if let Some(k) = self.user_node[n] {
            self.unmatch_node(k);
        }
        self.node_user[m] = Some(n);
        self.user_node[n] = Some(m);
        self.level[m] = Some(level);
    }

    pub fn decision(&self) -> ScheduleDecision {
        ScheduleDecision(
            self.node_user
                .iter()
                .zip(&self.level)
                .map(|(u, l)| match (u, l) {
                    (Some(user), Some(level)) => NodeDecision::Serve { user: *user, level: *level },
                    _ => NodeDecision::Idle,
                })
                .collect(),
        )
    }

    /// Violations of the matching definition: ids in range, at most one partner on
    /// each side, `Ψ(c_m) = u_n ⇔ Ψ⁻¹(u_n) = c_m`, and every pair a signal link.
    pub fn violations(&self, topology: &Topology) -> Vec<String> {
        let mut out = Vec::new();
        let (nodes, users) = (self.node_user.len(), self.user_node.len());
        if nodes != topology.node_count() || users != topology.user_count() {
            out.push(format!("sized {nodes}x{users} for a {}x{} topology", topology.node_count(), topology.user_count()));
            return out;
        }
        for (m, u) in self.node_user.iter().enumerate() {
            match u {
                Some(n) if *n >= users => out.push(format!("node {m} matched to unknown user {n}")),
                Some(n) => {
                    if self.user_node[*n] != Some(m) {
                        out.push(format!("node {m} -> user {n} not mirrored"));
                    }
                    if !topology.is_signal_pair(m, *n) {
                        out.push(format!("node {m} -> user {n} is not a signal link"));
                    }
                    if self.level[m].is_none() {
                        out.push(format!("node {m} matched without a power level"));
                    }
                }
                None if self.level[m].is_some() => out.push(format!("idle node {m} carries a power level")),
                None => {}
            }
        }
        for (n, c) in self.user_node.iter().enumerate() {
            match c {
                Some(m) if *m >= nodes => out.push(format!("user {n} matched to unknown node {m}")),
                Some(m) if self.node_user[*m] != Some(n) => out.push(format!("user {n} -> node {m} not mirrored")),
                _ => {}
            }
        }
        out
    }
}

/// Signal users of m outside `excluded`, by descending `max_l P_mnl`, ties by id.
pub fn preference_order(m: usize, marginals: &Marginals, excluded: &BTreeSet<usize>) -> Vec<usize> {
    let mut users: Vec<usize> = marginals
        .signal_users(m)
        .iter()
        .copied()
        .filter(|n| !excluded.contains(n))
        .collect();
    users.sort_by(|&a, &b| {
        marginals
            .user_mass(m, b)
            .total_cmp(&marginals.user_mass(m, a))
            .then(a.cmp(&b))
    });
    users
}

/// Most probable power level for the pair, ties toward the lowest power.
pub fn power_for(m: usize, n: usize, marginals: &Marginals) -> usize {
    let mut best = 0;
    for l in 1..marginals.levels() {
        if marginals.mass(m, n, l) > marginals.mass(m, n, best) {
            best = l;
        }
    }
    best
}

/// Candidate matching in which m serves n. A displaced holder of n re-proposes to
/// its best remaining user outside `excluded` (recursively), or goes idle when it
/// has none left or that user is less likely than idling.
pub fn match_request(
    m: usize,
    n: usize,
    current: &Matching,
    excluded: &mut BTreeSet<usize>,
    marginals: &Marginals,
) -> Matching {
    let mut out = current.clone();
    chain(m, n, &mut out, excluded, marginals, 0);
    out
}

fn chain(m: usize, n: usize, psi: &mut Matching, excluded: &mut BTreeSet<usize>, marginals: &Marginals, depth: usize) {
    assert!(depth <= psi.node_user.len(), "displacement chain longer than the node count");
    let holder = psi.node_of(n).filter(|&k| k != m);
    psi.assign(m, n, power_for(m, n, marginals));
    let Some(k) = holder else { return };
    let Some(&next) = preference_order(k, marginals, excluded).first() else {
        return; // V_k ⊆ E: k stays idle
    };
    if marginals.user_mass(k, next) < marginals.idle_mass(k) {
        return;
    }
    excluded.insert(next);
    chain(k, next, psi, excluded, marginals, depth + 1);
}

/// Order in which nodes take their turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeOrder {
    #[default]
    Ascending,
    Shuffled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub matching: Matching,
    pub decision: ScheduleDecision,
    pub utility: f64,
    /// Every proposal evaluated against the current utility, accepted or not.
    pub proposals: usize,
    /// Proposals aimed at a user already matched to an earlier node.
    pub displacing_proposals: usize,
    pub accepted: usize,
}

/// Builds a valid schedule from BP marginals. Each node proposes down its
/// preference list until a proposal strictly improves the utility or its next
/// preferred user is less likely than idling.
pub fn link_schedule(ctx: &SlotContext<'_>, marginals: &Marginals, order: NodeOrder) -> MatchOutcome {
    let topology = ctx.topology;
    let mut psi = Matching::empty(topology.node_count(), topology.user_count());
    let mut utility = 0.0;
    let (mut proposals, mut displacing, mut accepted) = (0, 0, 0);

    let mut nodes: Vec<usize> = (0..topology.node_count()).collect();
    if let NodeOrder::Shuffled { seed } = order {
        nodes.shuffle(&mut stream(seed, &[TAG_MATCH_ORDER]));
    }

    for m in nodes {
        let mut excluded = BTreeSet::new();
        while let Some(&n) = preference_order(m, marginals, &excluded).first() {
            if marginals.user_mass(m, n) < marginals.idle_mass(m) {
                break;
            }
            excluded.insert(n);
            proposals += 1;
            if psi.node_of(n).is_some() {
                displacing += 1;
            }
            let mut chain_excluded = excluded.clone();
            let candidate = match_request(m, n, &psi, &mut chain_excluded, marginals);
            let f = ctx.global_utility(&candidate.decision());
            if f > utility {
                psi = candidate;
                utility = f;
                accepted += 1;
                break;
            }
        }
    }
    let decision = psi.decision();
    MatchOutcome { matching: psi, decision, utility, proposals, displacing_proposals: displacing, accepted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::objective::{PhyParams, PowerGrid};
    use crate::topology::{CachingNode, Point, User};

    fn topo(nodes: &[(f64, f64)], users: &[(f64, f64)]) -> Topology {
        Topology::new(
            nodes.iter().map(|&(x, y)| CachingNode { position: Point::new(x, y), cache: vec![0] }).collect(),
            users.iter().map(|&(x, y)| User { position: Point::new(x, y), requested_file: 0 }).collect(),
            100.0,
            300.0,
        )
        .unwrap()
    }

    fn marg(t: &Topology, levels: usize, probs: Vec<Vec<f64>>) -> Marginals {
        Marginals::new(t, levels, probs)
    }

    #[test]
    fn preferences_sort_and_exhaust() {
        let t = topo(&[(0.0, 0.0)], &[(10.0, 0.0), (20.0, 0.0)]);
        let mg = marg(&t, 1, vec![vec![0.25, 0.4, 0.35]]);
        assert_eq!(preference_order(0, &mg, &BTreeSet::new()), vec![0, 1]);
        let mg = marg(&t, 1, vec![vec![0.2, 0.4, 0.4]]);
        assert_eq!(preference_order(0, &mg, &BTreeSet::new()), vec![0, 1]);
        let mg = marg(&t, 1, vec![vec![0.2, 0.3, 0.5]]);
        assert_eq!(preference_order(0, &mg, &BTreeSet::new()), vec![1, 0]);
        assert!(preference_order(0, &mg, &[0, 1].into()).is_empty());
    }

    #[test]
    fn power_levels() {
        let t = topo(&[(0.0, 0.0)], &[(10.0, 0.0)]);
        assert_eq!(power_for(0, 0, &marg(&t, 2, vec![vec![0.65, 0.1, 0.25]])), 1);
        assert_eq!(power_for(0, 0, &marg(&t, 2, vec![vec![0.5, 0.25, 0.25]])), 0);
        assert_eq!(power_for(0, 0, &marg(&t, 1, vec![vec![0.5, 0.5]])), 0);
    }

    #[test]
    fn request_to_free_user_changes_only_that_pair() {
        let t = topo(&[(0.0, 0.0), (150.0, 0.0)], &[(50.0, 0.0), (100.0, 0.0)]);
        let mg = marg(&t, 1, vec![vec![0.1, 0.5, 0.4], vec![0.1, 0.5, 0.4]]);
        let mut psi = Matching::empty(2, 2);
        psi.assign(1, 1, 0);
        let out = match_request(0, 0, &psi, &mut BTreeSet::from([0]), &mg);
        assert_eq!(out.user_of(0), Some(0));
        assert_eq!(out.user_of(1), Some(1));
        assert!(out.violations(&t).is_empty());
    }

    #[test]
    fn displaced_node_with_exhausted_list_goes_idle() {
        let t = topo(&[(0.0, 0.0), (150.0, 0.0)], &[(75.0, 0.0)]);
        let mg = marg(&t, 1, vec![vec![0.1, 0.9], vec![0.1, 0.9]]);
        let mut psi = Matching::empty(2, 1);
        psi.assign(1, 0, 0);
        let out = match_request(0, 0, &psi, &mut BTreeSet::from([0]), &mg);
        assert_eq!(out.user_of(0), Some(0));
        assert_eq!(out.user_of(1), None);
        assert!(out.violations(&t).is_empty());
    }

    #[test]
    fn displaced_node_takes_second_choice() {
        // node 1 holds user 0 (shared), and can also reach user 1
        let t = topo(&[(0.0, 0.0), (150.0, 0.0)], &[(75.0, 0.0), (200.0, 0.0)]);
        let mg = marg(&t, 2, vec![vec![0.1, 0.5, 0.4], vec![0.1, 0.4, 0.1, 0.1, 0.3]]);
        let mut psi = Matching::empty(2, 2);
        psi.assign(1, 0, 0);
        let mut e = BTreeSet::from([0]);
        let out = match_request(0, 0, &psi, &mut e, &mg);
        assert_eq!(out.user_of(0), Some(0));
        assert_eq!(out.user_of(1), Some(1));
        assert_eq!(out.level_of(1), Some(1));
        assert!(e.contains(&1));

        // second choice less likely than idling: the displaced node idles
        let mg = marg(&t, 2, vec![vec![0.1, 0.5, 0.4], vec![0.5, 0.4, 0.0, 0.05, 0.05]]);
        let out = match_request(0, 0, &psi, &mut BTreeSet::from([0]), &mg);
        assert_eq!(out.user_of(1), None);
    }

    #[test]
    fn idle_dominated_marginals_give_empty_schedule() {
        let t = topo(&[(0.0, 0.0), (150.0, 0.0)], &[(75.0, 0.0), (200.0, 0.0)]);
        let ch = ChannelRealization::from_fn(&t, 0, |m, n| t.distance(m, n).powi(-3));
        let grid = PowerGrid::uniform(2.0, 1).unwrap();
        let q = [10, 10];
        let ctx = SlotContext::new(&t, &ch, &q, 1.0, PhyParams::default(), &grid);
        let mg = marg(&t, 1, vec![vec![0.9, 0.1], vec![0.8, 0.1, 0.1]]);
        let out = link_schedule(&ctx, &mg, NodeOrder::Ascending);
        assert!(out.matching.is_empty());
        assert_eq!(out.utility, 0.0);
        assert_eq!(out.proposals, 0);
    }

    #[test]
    fn conflict_is_repaired_and_utility_tracks_decision() {
        // both nodes prefer the shared user 0
        let t = topo(&[(0.0, 0.0), (150.0, 0.0)], &[(75.0, 0.0), (-40.0, 0.0), (190.0, 0.0)]);
        let ch = ChannelRealization::from_fn(&t, 0, |m, n| t.distance(m, n).powi(-3));
        let grid = PowerGrid::uniform(2.0, 1).unwrap();
        let q = [20, 10, 10];
        let ctx = SlotContext::new(&t, &ch, &q, 1.0, PhyParams::default(), &grid);
        let mg = marg(&t, 1, vec![vec![0.05, 0.6, 0.35], vec![0.05, 0.6, 0.35]]);
        assert_eq!(crate::bp::decide(&mg).conflicted_users(), vec![0]);
        let out = link_schedule(&ctx, &mg, NodeOrder::Ascending);
        assert!(out.matching.violations(&t).is_empty());
        assert!(out.decision.conflicted_users().is_empty());
        assert_eq!(out.utility, ctx.global_utility(&out.decision));
        assert!(out.utility > 0.0);
        let n = t.node_count();
        assert!(out.proposals <= n * (n + 1) / 2);

        let shuffled = link_schedule(&ctx, &mg, NodeOrder::Shuffled { seed: 3 });
        assert!(shuffled.matching.violations(&t).is_empty());
    }

    #[test]
    fn violations_detect_broken_mirrors() {
        let t = topo(&[(0.0, 0.0)], &[(10.0, 0.0), (500.0, 0.0)]);
        let mut psi = Matching::empty(1, 2);
        psi.node_user[0] = Some(0);
        psi.level[0] = Some(0);
        assert!(!psi.violations(&t).is_empty());
        psi.user_node[0] = Some(0);
        assert!(psi.violations(&t).is_empty());
        psi.node_user[0] = Some(1);
        assert!(!psi.violations(&t).is_empty());
    }
}
