//! Per-user chunk queues with FIFO arrival stamps for delay accounting.

use std::collections::VecDeque;

use rand::Rng;

/// Chunks per user for this slot, i.i.d. uniform on `{0, ..., a_max}`.
pub fn sample_arrivals<R: Rng + ?Sized>(users: usize, a_max: u64, rng: &mut R) -> Vec<u64> {
    (0..users).map(|_| rng.random_range(0..=a_max)).collect()
}

/// Whole chunks a link of `rate` bits/s can carry in one slot.
#[inline]
pub fn chunk_capacity(rate: f64, tau_c: f64, chunk_bits: f64) -> u64 {
    let c = (tau_c * rate / chunk_bits).floor();
    if c.is_finite() && c > 0.0 {
        c as u64
    } else {
        0
    }
}

/// Served chunks `min(floor(tau_c * R_n / S), Q_n)` per user.
pub fn departures(rates: &[f64], backlog: &[u64], tau_c: f64, chunk_bits: f64) -> Vec<u64> {
    rates
        .iter()
        .zip(backlog)
        .map(|(&r, &q)| chunk_capacity(r, tau_c, chunk_bits).min(q))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    fifos: Vec<VecDeque<u64>>,
    thresholds: Vec<u64>,
    arrived: Vec<u64>,
    served: Vec<u64>,
    /// Served chunks whose wait exceeded each threshold.
    served_late: Vec<u64>,
    total_wait: u64,
}

impl QueueState {
    pub fn new(users: usize, thresholds: &[u64]) -> Self {
        Self {
            fifos: vec![VecDeque::new(); users],
            thresholds: thresholds.to_vec(),
            arrived: vec![0; users],
            served: vec![0; users],
            served_late: vec![0; thresholds.len()],
            total_wait: 0,
        }
    }

    pub fn users(&self) -> usize {
        self.fifos.len()
    }

    pub fn backlog(&self, n: usize) -> u64 {
        self.fifos[n].len() as u64
    }

    pub fn backlogs(&self) -> Vec<u64> {
        self.fifos.iter().map(|f| f.len() as u64).collect()
    }

    pub fn total_backlog(&self) -> u64 {
        self.fifos.iter().map(|f| f.len() as u64).sum()
    }

    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    pub fn arrived(&self) -> &[u64] {
        &self.arrived
    }

    pub fn served(&self) -> &[u64] {
        &self.served
    }

    pub fn total_arrived(&self) -> u64 {
        self.arrived.iter().sum()
    }

    pub fn total_served(&self) -> u64 {
        self.served.iter().sum()
    }

    /// Mean waiting time in slots over all served chunks.
    pub fn mean_wait(&self) -> f64 {
        let s = self.total_served();
        if s == 0 {
            0.0
        } else {
            self.total_wait as f64 / s as f64
        }
    }

    /// One slot: the `served` oldest chunks depart, then `arrivals` are stamped with `slot`.
    ///
    /// # Panics
    /// If any user is asked to serve more chunks than it holds.
    pub fn advance(&mut self, served: &[u64], arrivals: &[u64], slot: u64) {
        assert_eq!(served.len(), self.users());
        assert_eq!(arrivals.len(), self.users());
        for n in 0..self.users() {
            let fifo = &mut self.fifos[n];
            assert!(
                served[n] <= fifo.len() as u64,
                "user {n}: serving {} chunks from a backlog of {}",
                served[n],
                fifo.len()
            );
            for _ in 0..served[n] {
                let stamp = fifo.pop_front().expect("checked above");
                let wait = slot - stamp;
                self.total_wait += wait;
                for (late, &d) in self.served_late.iter_mut().zip(&self.thresholds) {
                    if wait > d {
                        *late += 1;
                    }
                }
            }
            self.served[n] += served[n];
            fifo.extend(std::iter::repeat_n(slot, arrivals[n] as usize));
            self.arrived[n] += arrivals[n];
        }
    }

    /// Failed chunks per threshold as seen at slot `now`: chunks served after waiting
    /// longer than the threshold plus chunks still queued whose age already exceeds it.
    pub fn failures(&self, now: u64) -> Vec<u64> {
        self.thresholds
            .iter()
            .zip(&self.served_late)
            .map(|(&d, &late)| {
                let waiting: u64 = self
                    .fifos
                    .iter()
                    .map(|f| f.iter().take_while(|&&stamp| now - stamp > d).count() as u64)
                    .sum();
                late + waiting
            })
            .collect()
    }

    /// Failures divided by the chunks that have arrived so far.
    pub fn failure_rates(&self, now: u64) -> Vec<f64> {
        let arrived = self.total_arrived();
        self.failures(now)
            .into_iter()
            .map(|f| if arrived == 0 { 0.0 } else { f as f64 / arrived as f64 })
            .collect()
    }
}
