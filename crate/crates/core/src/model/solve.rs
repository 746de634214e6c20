//! Exact solvers: optimal values, hitting times and finite-horizon policy values.

use super::instance::SspInstance;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Deterministic policy, either stationary or indexed by layer `h = 1..=H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTable {
    num_states: usize,
    layers: usize,
    actions: Vec<usize>,
}

impl PolicyTable {
    pub fn stationary(actions: Vec<usize>) -> Self {
        Self { num_states: actions.len(), layers: 1, actions }
    }

    /// `actions[h - 1][s]` is the action at layer `h`.
    pub fn layered(actions: Vec<Vec<usize>>) -> Self {
        let layers = actions.len();
        let num_states = actions.first().map_or(0, Vec::len);
        Self { num_states, layers, actions: actions.concat() }
    }

    pub fn is_stationary(&self) -> bool {
        self.layers == 1
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Action at 1-based layer `h`; stationary tables ignore `h`.
    pub fn action(&self, h: usize, s: usize) -> usize {
        let layer = if self.layers == 1 { 0 } else { h - 1 };
        self.actions[layer * self.num_states + s]
    }

    pub fn check_range(&self, num_actions: usize) -> Result<()> {
        match self.actions.iter().find(|&&a| a >= num_actions) {
            Some(a) => Err(Error::InvalidSpec(format!("policy action {a} out of range"))),
            None => Ok(()),
        }
    }
}

#[inline]
pub(crate) fn dot(row: &[f64], v: &[f64]) -> f64 {
    row.iter().zip(v).map(|(p, x)| p * x).sum()
}

/// Optimal values and the greedy policy (lowest action index on ties).
///
/// `values` has `S + 1` entries; the goal entry is `0`.
pub fn ssp_optimal_values(
    inst: &SspInstance,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, PolicyTable)> {
    let n = inst.num_states();
    let mut v = vec![0.0; n + 1];
    let mut next = vec![0.0; n + 1];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iters {
        residual = 0.0;
        for s in 0..n {
            let best = (0..inst.num_actions())
                .map(|a| inst.cost(s, a) + dot(inst.row(s, a), &v))
                .fold(f64::INFINITY, f64::min);
            residual = f64::max(residual, (best - v[s]).abs());
            next[s] = best;
        }
        std::mem::swap(&mut v, &mut next);
        if residual <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: max_iters, residual });
    }
    let policy = greedy_policy(inst, &v);
    Ok((v, policy))
}

/// Greedy policy with respect to `v` (length `S + 1`), ties to the lowest index.
pub fn greedy_policy(inst: &SspInstance, v: &[f64]) -> PolicyTable {
    let actions = (0..inst.num_states())
        .map(|s| {
            let mut best = 0;
            let mut best_q = f64::INFINITY;
            for a in 0..inst.num_actions() {
                let q = inst.cost(s, a) + dot(inst.row(s, a), v);
                if q < best_q {
                    best_q = q;
                    best = a;
                }
            }
            best
        })
        .collect();
    PolicyTable::stationary(actions)
}

/// One application of the Bellman optimality operator.
pub fn bellman_backup(inst: &SspInstance, v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = (0..inst.num_states())
        .map(|s| {
            (0..inst.num_actions())
                .map(|a| inst.cost(s, a) + dot(inst.row(s, a), v))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    out.push(0.0);
    out
}

/// Expected number of steps to reach the goal under a stationary policy.
///
/// Fails with [`Error::ImproperPolicy`] when some state cannot reach the goal
/// under `policy`, and with [`Error::NonConvergence`] if iteration stalls.
pub fn policy_hitting_times(inst: &SspInstance, policy: &PolicyTable) -> Result<Vec<f64>> {
    policy.check_range(inst.num_actions())?;
    if let Some(&state) = inst.states_without_goal_path(|s| [policy.action(1, s)]).first() {
        return Err(Error::ImproperPolicy { state });
    }
    let n = inst.num_states();
    // t[goal] stays 0 so the dot product ignores the goal outcome.
    let mut t = vec![0.0; n + 1];
    let mut next = vec![0.0; n + 1];
    let mut residual = f64::INFINITY;
    for _ in 0..DEFAULT_MAX_ITERS {
        residual = 0.0;
        for s in 0..n {
            let val = 1.0 + dot(inst.row(s, policy.action(1, s)), &t);
            residual = f64::max(residual, (val - t[s]).abs());
            next[s] = val;
        }
        std::mem::swap(&mut t, &mut next);
        if residual <= DEFAULT_TOL {
            t.truncate(n);
            return Ok(t);
        }
    }
    Err(Error::NonConvergence { iterations: DEFAULT_MAX_ITERS, residual })
}

/// Backward induction of a (possibly layered) policy over `horizon` steps.
///
/// Returns `horizon + 1` layers; entry `h - 1` holds `V_h` over `S + 1`
/// outcomes with `V_h(goal) = 0`, and the last layer is the terminal cost.
pub fn finite_horizon_policy_value(
    inst: &SspInstance,
    policy: &PolicyTable,
    horizon: usize,
    terminal_cost: &[f64],
) -> Vec<Vec<f64>> {
    let n = inst.num_states();
    assert_eq!(terminal_cost.len(), n, "terminal cost must cover every non-goal state");
    let mut layers = vec![vec![0.0; n + 1]; horizon + 1];
    layers[horizon][..n].copy_from_slice(terminal_cost);
    for h in (1..=horizon).rev() {
        let (head, tail) = layers.split_at_mut(h);
        let next = &tail[0];
        let cur = &mut head[h - 1];
        for s in 0..n {
            let a = policy.action(h, s);
            cur[s] = inst.cost(s, a) + dot(inst.row(s, a), next);
        }
    }
    layers
}

/// `c_f(s) = 2 B⋆` away from the goal.
pub fn terminal_cost(num_states: usize, b_star: f64) -> Vec<f64> {
    vec![2.0 * b_star; num_states]
}
