//! Hard instance families and controlled-drift sequences.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriftSequence, SspInstance};

/// Parameters of one lower-bound instance `M^K_{i⋆, j⋆}`.
///
/// `episodes` is real valued because the piecewise construction feeds
/// `K / (2 L)` into the perturbation sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSpec {
    /// Number of leaf states (and of actions at the initial state).
    pub n: usize,
    pub b_star: f64,
    pub t_star: f64,
    pub episodes: f64,
    /// Leaf with the cheaper cost, `0` for none.
    pub good_cost: usize,
    /// Leaf with the faster exit, `0` for none.
    pub good_trans: usize,
}

impl LowerBoundSpec {
    pub fn eps_cost(&self) -> f64 {
        let n = self.n as f64;
        (1.0 - 1.0 / n) / 4.0 * (n * self.b_star / self.episodes).sqrt()
    }

    pub fn eps_trans(&self) -> f64 {
        let n = self.n as f64;
        (1.0 - 1.0 / n) / 4.0 * (n / self.episodes).sqrt()
    }

    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.b_star < 1.0 {
            return fail(format!("b_star = {} < 1", self.b_star));
        }
        if self.t_star < 3.0 * self.b_star {
            return fail(format!("t_star = {} < 3 b_star", self.t_star));
        }
        if self.n < 10 {
            return fail(format!("n = {} < 10", self.n));
        }
        if self.episodes < self.n as f64 {
            return fail(format!("episodes = {} < n = {}", self.episodes, self.n));
        }
        if self.good_cost > self.n || self.good_trans > self.n {
            return fail("good leaf index exceeds n".into());
        }
        if (self.b_star + self.eps_cost()) / self.t_star > 1.0 {
            return fail("perturbed cost mean exceeds 1".into());
        }
        if (1.0 + self.eps_trans()) / self.t_star > 1.0 {
            return fail("perturbed goal probability exceeds 1".into());
        }
        Ok(())
    }
}

/// Builds `M^K_{i⋆, j⋆}` over states `{s_init, s_1, .., s_N}` and `N` actions.
///
/// Leaves have a single real action; the table aliases every action there to
/// it so learners see a rectangular `(N + 1) x N` shape.
pub fn make_lower_bound_instance(spec: &LowerBoundSpec) -> Result<SspInstance> {
    spec.check()?;
    let n = spec.n;
    let num_states = n + 1;
    let eps_c = spec.eps_cost();
    let eps_p = spec.eps_trans();
    let mut inst = SspInstance::trivial(num_states, n);
    for a in 0..n {
        inst.set_cost(0, a, 0.0);
        let row = inst.row_mut(0, a);
        row.fill(0.0);
        row[a + 1] = 1.0;
    }
    for leaf in 1..=n {
        let bump = if leaf != spec.good_cost { eps_c } else { 0.0 };
        let cost = (spec.b_star + bump) / spec.t_star;
        let boost = if leaf == spec.good_trans { eps_p } else { 0.0 };
        let p_goal = (1.0 + boost) / spec.t_star;
        for a in 0..n {
            inst.set_cost(leaf, a, cost);
            let row = inst.row_mut(leaf, a);
            row.fill(0.0);
            row[leaf] = 1.0 - p_goal;
            row[num_states] = p_goal;
        }
    }
    Ok(inst)
}

/// Epoch counts of the piecewise construction before rounding.
pub fn hard_sequence_epochs(
    b_star: f64,
    t_star: f64,
    n: usize,
    episodes: usize,
    delta_c: f64,
    delta_p: f64,
) -> (f64, f64) {
    let nf = n as f64;
    let k = episodes as f64;
    let shrink = 1.0 - 1.0 / nf;
    let l_c = (4.0 * delta_c * t_star / shrink).powf(2.0 / 3.0) * (k / (2.0 * nf * b_star)).cbrt();
    let l_p = (2.0 * delta_p * t_star / shrink).powf(2.0 / 3.0) * (k / (2.0 * nf)).cbrt();
    (l_c, l_p)
}

/// Piecewise-stationary sequence: `L_c` cost-perturbed epochs over the first
/// half, `L_P` transition-perturbed epochs over the second.
///
/// A zero budget collapses its half into one unperturbed epoch built with the
/// other half's per-epoch `K`, so that half contributes no drift of its own.
pub fn make_hard_sequence(
    b_star: f64,
    t_star: f64,
    n: usize,
    episodes: usize,
    delta_c: f64,
    delta_p: f64,
    seed: u64,
) -> Result<DriftSequence> {
    if delta_c < 0.0 || delta_p < 0.0 {
        return Err(Error::InvalidSpec("drift budgets must be non-negative".into()));
    }
    let (l_c_real, l_p_real) = hard_sequence_epochs(b_star, t_star, n, episodes, delta_c, delta_p);
    let l_c = (l_c_real.round() as usize).max(1);
    let l_p = (l_p_real.round() as usize).max(1);
    let k = episodes as f64;
    let len_c = episodes / (2 * l_c);
    let len_p = episodes / (2 * l_p);
    if len_c == 0 || len_p == 0 {
        return Err(Error::InvalidSpec(format!(
            "K = {episodes} too short for {l_c} + {l_p} epochs"
        )));
    }
    let k_c = k / (2.0 * l_c as f64);
    let k_p = k / (2.0 * l_p as f64);
    let (k_c, k_p) = match (delta_c > 0.0, delta_p > 0.0) {
        (true, true) => (k_c, k_p),
        (true, false) => (k_c, k_c),
        (false, true) => (k_p, k_p),
        (false, false) => (k / 2.0, k / 2.0),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaf = Uniform::new_inclusive(1, n);
    let base = LowerBoundSpec { n, b_star, t_star, episodes: 0.0, good_cost: 0, good_trans: 0 };
    let mut segments = Vec::with_capacity(l_c + l_p);
    let mut start = 1;
    for _ in 0..l_c {
        let good_cost = if delta_c > 0.0 { leaf.sample(&mut rng) } else { 0 };
        let spec = LowerBoundSpec { episodes: k_c, good_cost, ..base };
        segments.push((start, make_lower_bound_instance(&spec)?));
        start += len_c;
    }
    for _ in 0..l_p {
        let good_trans = if delta_p > 0.0 { leaf.sample(&mut rng) } else { 0 };
        let spec = LowerBoundSpec { episodes: k_p, good_trans, ..base };
        segments.push((start, make_lower_bound_instance(&spec)?));
        start += len_p;
    }
    // the remainder of K is absorbed by the final epoch
    Ok(DriftSequence::new(episodes, segments)?.compressed())
}

/// Single-state instance with cost `B⋆/T⋆` and goal probability `1/T⋆`,
/// followed halfway through by the `(+dc, -dp/2)` perturbation.
pub fn make_perturbation_pair(
    b_star: f64,
    t_star: f64,
    dc: f64,
    dp: f64,
    episodes: usize,
) -> Result<DriftSequence> {
    if dc < 0.0 || dp < 0.0 || dc.max(dp) > 1.0 / t_star {
        return Err(Error::InvalidSpec(format!(
            "perturbation ({dc}, {dp}) must lie in [0, 1/T⋆ = {}]",
            1.0 / t_star
        )));
    }
    if !(1.0..=t_star).contains(&b_star) {
        return Err(Error::InvalidSpec("need 1 <= b_star <= t_star".into()));
    }
    if episodes < 2 {
        return Err(Error::InvalidSpec("pair needs at least two episodes".into()));
    }
    let single = |c: f64, p: f64| {
        SspInstance::from_tables(vec![vec![c]], vec![vec![vec![1.0 - p, p]]])
    };
    let first = single(b_star / t_star, 1.0 / t_star)?;
    let second = single(b_star / t_star + dc, 1.0 / t_star - dp / 2.0)?;
    second.validate().into_result()?;
    Ok(DriftSequence::new(episodes, vec![(1, first), (episodes / 2 + 1, second)])?.compressed())
}

/// Random instance with Dirichlet(1) rows mixed with at least
/// `goal_prob_floor` mass on the goal for every action.
pub fn make_random_proper(
    num_states: usize,
    num_actions: usize,
    goal_prob_floor: f64,
    seed: u64,
) -> Result<SspInstance> {
    if !(goal_prob_floor > 0.0 && goal_prob_floor <= 1.0) {
        return Err(Error::InvalidSpec(format!("goal_prob_floor = {goal_prob_floor}")));
    }
    if num_states == 0 || num_actions == 0 {
        return Err(Error::InvalidSpec("need S, A >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = SspInstance::trivial(num_states, num_actions);
    let goal = num_states;
    for s in 0..num_states {
        for a in 0..num_actions {
            inst.set_cost(s, a, rng.gen::<f64>());
            // exponential weights normalised: a flat Dirichlet draw
            let weights: Vec<f64> =
                (0..=num_states).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = weights.iter().sum();
            let row = inst.row_mut(s, a);
            for (p, w) in row.iter_mut().zip(&weights) {
                *p = (1.0 - goal_prob_floor) * w / total;
            }
            row[goal] += goal_prob_floor;
        }
    }
    Ok(inst)
}
