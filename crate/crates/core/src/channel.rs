//! Block Rayleigh fading. The squared amplitude of a CN(0,1) fade is a unit-mean
//! exponential, so `|h|² = d^-α · E` with `E ~ Exp(1)` drawn directly.

use std::io::Write;

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::rng::{stream, TAG_CHANNEL};
use crate::topology::Topology;

/// Inverse path loss `1 / d^alpha`.
pub fn path_gain(distance: f64, alpha: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("path gain needs a positive distance, got {distance}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("path-loss exponent must be > 0, got {alpha}")));
    }
    Ok(distance.powf(-alpha))
}

/// Squared channel gains for one slot. Entries exist only for neighboring pairs;
/// every other `(m, n)` reads as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub slot: u64,
    users: usize,
    gains: Vec<f64>,
}

impl ChannelRealization {
    /// All-zero realization sized for `nodes x users`.
    pub fn zeros(nodes: usize, users: usize, slot: u64) -> Self {
        Self { slot, users, gains: vec![0.0; nodes * users] }
    }

    /// Builds a realization from an explicit gain function over neighboring pairs.
    pub fn from_fn(topology: &Topology, slot: u64, mut gain: impl FnMut(usize, usize) -> f64) -> Self {
        let mut ch = Self::zeros(topology.node_count(), topology.user_count(), slot);
        for m in 0..topology.node_count() {
            for &n in topology.interference_users(m) {
                ch.set(m, n, gain(m, n));
            }
        }
        ch
    }

    #[inline]
    pub fn gain(&self, m: usize, n: usize) -> f64 {
        self.gains[m * self.users + n]
    }

    pub fn set(&mut self, m: usize, n: usize, value: f64) {
        assert!(value >= 0.0, "channel gains are non-negative");
        self.gains[m * self.users + n] = value;
    }

    /// Copies the gains of the listed original nodes/users into a smaller table.
    pub fn restrict(&self, node_ids: &[usize], user_ids: &[usize]) -> Self {
        let mut out = Self::zeros(node_ids.len(), user_ids.len(), self.slot);
        for (i, &m) in node_ids.iter().enumerate() {
            for (j, &n) in user_ids.iter().enumerate() {
                out.gains[i * out.users + j] = self.gain(m, n);
            }
        }
        out
    }

    /// Writes `node,user,distance_m,gain` rows for the neighboring pairs.
    pub fn write_csv<W: Write>(&self, topology: &Topology, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "user", "distance_m", "gain"])?;
        for m in 0..topology.node_count() {
            for &n in topology.interference_users(m) {
                w.serialize((m, n, topology.distance(m, n), self.gain(m, n)))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws the fading realization for `slot`. Each pair uses its own stream keyed by
/// `(seed, m, n, slot)`, so the result does not depend on evaluation order.
pub fn sample_channel(topology: &Topology, alpha: f64, slot: u64, seed: u64) -> Result<ChannelRealization> {
    let mut ch = ChannelRealization::zeros(topology.node_count(), topology.user_count(), slot);
    for m in 0..topology.node_count() {
        for &n in topology.interference_users(m) {
            let d = topology.distance(m, n);
            let mut rng = stream(seed, &[TAG_CHANNEL, m as u64, n as u64, slot]);
            let fade: f64 = Exp1.sample(&mut rng);
            ch.set(m, n, path_gain(d, alpha)? * fade);
        }
    }
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{CachingNode, Point, User};

    fn two_pair_topology() -> Topology {
        let nodes = vec![
            CachingNode { position: Point::new(0.0, 0.0), cache: vec![0] },
            CachingNode { position: Point::new(150.0, 0.0), cache: vec![0] },
        ];
        let users = vec![
            User { position: Point::new(50.0, 0.0), requested_file: 0 },
            User { position: Point::new(120.0, 0.0), requested_file: 0 },
        ];
        Topology::new(nodes, users, 100.0, 300.0).unwrap()
    }

    #[test]
    fn path_gain_values() {
        assert!((path_gain(100.0, 3.0).unwrap() - 1e-6).abs() < 1e-18);
        assert_eq!(path_gain(1.0, 2.7).unwrap(), 1.0);
        let ratio = path_gain(50.0, 3.0).unwrap() / path_gain(100.0, 3.0).unwrap();
        assert!((ratio - 8.0).abs() < 1e-12);
        assert!(path_gain(0.0, 3.0).is_err());
        assert!(path_gain(10.0, 0.0).is_err());
    }

    #[test]
    fn deterministic_per_slot_and_nonnegative() {
        let t = two_pair_topology();
        let a = sample_channel(&t, 3.0, 17, 99).unwrap();
        let b = sample_channel(&t, 3.0, 17, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_channel(&t, 3.0, 18, 99).unwrap();
        assert_ne!(a, c);
        for m in 0..2 {
            for n in 0..2 {
                assert!(a.gain(m, n) >= 0.0);
            }
        }
    }

    #[test]
    fn fading_is_unit_mean_exponential_and_pairs_independent() {
        let t = two_pair_topology();
        let slots = 100_000u64;
        let pg00 = path_gain(t.distance(0, 0), 3.0).unwrap();
        let pg11 = path_gain(t.distance(1, 1), 3.0).unwrap();
        let (mut s0, mut s1, mut s00, mut s11, mut s01) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for slot in 0..slots {
            let ch = sample_channel(&t, 3.0, slot, 5).unwrap();
            let x = ch.gain(0, 0) / pg00;
            let y = ch.gain(1, 1) / pg11;
            s0 += x;
            s1 += y;
            s00 += x * x;
            s11 += y * y;
            s01 += x * y;
        }
        let k = slots as f64;
        let (mx, my) = (s0 / k, s1 / k);
        let (vx, vy) = (s00 / k - mx * mx, s11 / k - my * my);
        let rho = (s01 / k - mx * my) / (vx * vy).sqrt();
        assert!((mx - 1.0).abs() < 0.02, "mean {mx}");
        assert!((vx - 1.0).abs() < 0.02, "variance {vx}");
        assert!(rho.abs() < 0.02, "correlation {rho}");
    }

    #[test]
    fn csv_dump_has_one_row_per_pair() {
        let t = two_pair_topology();
        let ch = sample_channel(&t, 3.0, 0, 1).unwrap();
        let mut buf = Vec::new();
        ch.write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + t.edge_count());
    }
}
