use rand::Rng;
use serde::{Deserialize, Serialize};

/// Regret envelope `R(m) = min{c₁√m + c₂, c₃m}` of a base learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Envelope {
    /// Envelope of the terminating MVP base learner with multiplier `kappa`.
    pub fn for_mvp_base(b_star: f64, num_states: usize, num_actions: usize, horizon: usize, kappa: f64) -> Self {
        let (s, a) = (num_states as f64, num_actions as f64);
        Self {
            c1: kappa * b_star * s * a.sqrt(),
            c2: kappa * b_star * s * s * a,
            c3: horizon as f64,
            c4: kappa * b_star,
        }
    }

    pub fn big_r(&self, m: f64) -> f64 {
        (self.c1 * m.sqrt() + self.c2).min(self.c3 * m)
    }

    /// `r(m) = R(m)/m`.
    pub fn r(&self, m: f64) -> f64 {
        self.big_r(m) / m
    }
}

/// Slots of one block of order `n`: `scheduled[l][j]` says whether a base
/// instance runs on block offsets `j·2^l ..= (j+1)·2^l - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgSchedule {
    order: u32,
    scheduled: Vec<Vec<bool>>,
}

impl MalgSchedule {
    /// Draws each order-`l` slot with probability `r(2^n)/r(2^l)`; the
    /// order-`n` slot always exists. Without `subslots` only it is drawn.
    pub fn build<R: Rng + ?Sized>(order: u32, env: &Envelope, subslots: bool, rng: &mut R) -> Self {
        let top = env.r((1u64 << order) as f64);
        let scheduled = (0..=order)
            .map(|l| {
                let count = 1usize << (order - l);
                if l == order {
                    return vec![true];
                }
                if !subslots {
                    return vec![false; count];
                }
                let p = (top / env.r((1u64 << l) as f64)).min(1.0);
                (0..count).map(|_| rng.gen::<f64>() < p).collect()
            })
            .collect();
        Self { order, scheduled }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        1 << self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_scheduled(&self, l: u32, j: usize) -> bool {
        self.scheduled[l as usize][j]
    }

    /// Number of scheduled slots of each order.
    pub fn slot_counts(&self) -> Vec<usize> {
        self.scheduled.iter().map(|v| v.iter().filter(|&&b| b).count()).collect()
    }

    /// Shortest scheduled slot `(l, j)` covering block offset `t`.
    pub fn active(&self, t: usize) -> (u32, usize) {
        (0..=self.order)
            .map(|l| (l, t >> l))
            .find(|&(l, j)| self.is_scheduled(l, j))
            .expect("the top slot covers every offset")
    }

    /// Scheduled slots whose last offset is `t`.
    pub fn ending_at(&self, t: usize) -> impl Iterator<Item = (u32, usize)> + '_ {
        (0..=self.order).filter_map(move |l| {
            let len = 1usize << l;
            ((t + 1) % len == 0 && self.is_scheduled(l, (t + 1) / len - 1)).then(|| (l, (t + 1) / len - 1))
        })
    }
}
