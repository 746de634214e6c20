use std::collections::VecDeque;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// One stationary SSP over `S` non-goal states and `A` actions.
///
/// States are `0..S`; the goal is the extra outcome index `S` of every
/// transition row. The initial state is state `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SspInstance {
    num_states: usize,
    num_actions: usize,
    cost: Vec<f64>,
    trans: Vec<f64>,
}

impl SspInstance {
    /// Builds an instance from nested tables (`cost[s][a]`, `trans[s][a][s']`).
    ///
    /// Only shapes are checked here; semantic checks live in [`SspInstance::validate`].
    pub fn from_tables(cost: Vec<Vec<f64>>, trans: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let num_states = cost.len();
        if num_states == 0 {
            return Err(Error::InvalidSpec("instance needs at least one state".into()));
        }
        let num_actions = cost[0].len();
        if num_actions == 0 {
            return Err(Error::InvalidSpec("instance needs at least one action".into()));
        }
        if trans.len() != num_states {
            return Err(Error::InvalidSpec(format!(
                "cost has {num_states} states but trans has {}",
                trans.len()
            )));
        }
        let mut flat_cost = Vec::with_capacity(num_states * num_actions);
        let mut flat_trans = Vec::with_capacity(num_states * num_actions * (num_states + 1));
        for (s, (crow, trow)) in cost.iter().zip(&trans).enumerate() {
            if crow.len() != num_actions || trow.len() != num_actions {
                return Err(Error::InvalidSpec(format!("state {s} has a ragged action dimension")));
            }
            flat_cost.extend_from_slice(crow);
            for (a, p) in trow.iter().enumerate() {
                if p.len() != num_states + 1 {
                    return Err(Error::InvalidSpec(format!(
                        "row ({s},{a}) has {} outcomes, expected {}",
                        p.len(),
                        num_states + 1
                    )));
                }
                flat_trans.extend_from_slice(p);
            }
        }
        Ok(Self { num_states, num_actions, cost: flat_cost, trans: flat_trans })
    }

    /// An instance with zero costs and every row jumping straight to the goal.
    pub fn trivial(num_states: usize, num_actions: usize) -> Self {
        let mut inst = Self {
            num_states,
            num_actions,
            cost: vec![0.0; num_states * num_actions],
            trans: vec![0.0; num_states * num_actions * (num_states + 1)],
        };
        for s in 0..num_states {
            for a in 0..num_actions {
                inst.row_mut(s, a)[num_states] = 1.0;
            }
        }
        inst
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Outcome index of the goal.
    pub fn goal(&self) -> usize {
        self.num_states
    }

    pub fn cost(&self, s: usize, a: usize) -> f64 {
        self.cost[s * self.num_actions + a]
    }

    pub fn set_cost(&mut self, s: usize, a: usize, c: f64) {
        self.cost[s * self.num_actions + a] = c;
    }

    /// Transition row over `S + 1` outcomes.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let w = self.num_states + 1;
        let start = (s * self.num_actions + a) * w;
        &self.trans[start..start + w]
    }

    pub fn row_mut(&mut self, s: usize, a: usize) -> &mut [f64] {
        let w = self.num_states + 1;
        let start = (s * self.num_actions + a) * w;
        &mut self.trans[start..start + w]
    }

    pub fn cost_table(&self) -> Vec<Vec<f64>> {
        self.cost.chunks(self.num_actions).map(<[f64]>::to_vec).collect()
    }

    pub fn trans_table(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.num_states)
            .map(|s| (0..self.num_actions).map(|a| self.row(s, a).to_vec()).collect())
            .collect()
    }

    /// Sup-norm distance between cost tables.
    pub fn cost_distance(&self, other: &Self) -> f64 {
        self.cost
            .iter()
            .zip(&other.cost)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Largest L1 distance between matching transition rows.
    pub fn trans_distance(&self, other: &Self) -> f64 {
        let w = self.num_states + 1;
        self.trans
            .chunks(w)
            .zip(other.trans.chunks(w))
            .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.num_states == other.num_states && self.num_actions == other.num_actions
    }

    /// Checks the model assumptions and reports every defect found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let c = self.cost(s, a);
                if !(0.0..=1.0).contains(&c) {
                    report.cost_range.push(CostDefect { state: s, action: a, value: c });
                }
                let row = self.row(s, a);
                if let Some(&p) = row.iter().find(|p| **p < 0.0 || !p.is_finite()) {
                    report.negative_entries.push(EntryDefect { state: s, action: a, value: p });
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    report.row_sums.push(RowSumDefect { state: s, action: a, sum });
                }
            }
        }
        report.unreachable_goal = self.states_without_goal_path(|_| 0..self.num_actions);
        report
    }

    /// Non-goal states from which the goal cannot be reached when only the
    /// actions yielded by `allowed` may be played.
    pub(crate) fn states_without_goal_path<F, I>(&self, allowed: F) -> Vec<usize>
    where
        F: Fn(usize) -> I,
        I: IntoIterator<Item = usize>,
    {
        let n = self.num_states;
        let goal = self.goal();
        // Reverse graph over positive-probability edges.
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for s in 0..n {
            for a in allowed(s) {
                for (t, &p) in self.row(s, a).iter().enumerate() {
                    if p > 0.0 {
                        preds[t].push(s);
                    }
                }
            }
        }
        let mut reach = vec![false; n + 1];
        reach[goal] = true;
        let mut queue = VecDeque::from([goal]);
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !reach[s] {
                    reach[s] = true;
                    queue.push_back(s);
                }
            }
        }
        (0..n).filter(|&s| !reach[s]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSumDefect {
    pub state: usize,
    pub action: usize,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryDefect {
    pub state: usize,
    pub action: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostDefect {
    pub state: usize,
    pub action: usize,
    pub value: f64,
}

/// Outcome of [`SspInstance::validate`]. Callers decide how to react.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub row_sums: Vec<RowSumDefect>,
    pub negative_entries: Vec<EntryDefect>,
    pub cost_range: Vec<CostDefect>,
    /// States from which no policy reaches the goal.
    pub unreachable_goal: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.row_sums.is_empty()
            && self.negative_entries.is_empty()
            && self.cost_range.is_empty()
            && self.unreachable_goal.is_empty()
    }

    pub fn is_proper(&self) -> bool {
        self.unreachable_goal.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("{self:?}")))
        }
    }
}

/// Free function form of [`SspInstance::validate`].
pub fn validate_instance(inst: &SspInstance) -> ValidationReport {
    inst.validate()
}
