/// Visit and cost accumulators with independent cost and transition resets.
#[derive(Debug, Clone, PartialEq)]
pub struct Counters {
    num_states: usize,
    num_actions: usize,
    cost_sum: Vec<f64>,
    cost_count: Vec<u64>,
    trans_count: Vec<u64>,
    outcome_count: Vec<u64>,
}

impl Counters {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        let pairs = num_states * num_actions;
        Self {
            num_states,
            num_actions,
            cost_sum: vec![0.0; pairs],
            cost_count: vec![0; pairs],
            trans_count: vec![0; pairs],
            outcome_count: vec![0; pairs * (num_states + 1)],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn idx(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    /// Adds one observation. Returns `true` when the incremented cost count
    /// `M(s,a)` or transition count `N(s,a)` became a power of two.
    pub fn record(&mut self, s: usize, a: usize, cost: f64, next: usize) -> bool {
        let i = self.idx(s, a);
        self.cost_sum[i] += cost;
        self.cost_count[i] += 1;
        self.trans_count[i] += 1;
        self.outcome_count[i * (self.num_states + 1) + next] += 1;
        self.cost_count[i].is_power_of_two() || self.trans_count[i].is_power_of_two()
    }

    /// Zeroes `C` and `M`.
    pub fn reset_cost(&mut self) {
        self.cost_sum.fill(0.0);
        self.cost_count.fill(0);
    }

    /// Zeroes `N(s,a)` and `N(s,a,s')`.
    pub fn reset_transitions(&mut self) {
        self.trans_count.fill(0);
        self.outcome_count.fill(0);
    }

    pub fn cost_sum(&self, s: usize, a: usize) -> f64 {
        self.cost_sum[self.idx(s, a)]
    }

    pub fn cost_count(&self, s: usize, a: usize) -> u64 {
        self.cost_count[self.idx(s, a)]
    }

    pub fn trans_count(&self, s: usize, a: usize) -> u64 {
        self.trans_count[self.idx(s, a)]
    }

    pub fn outcomes(&self, s: usize, a: usize) -> &[u64] {
        let w = self.num_states + 1;
        let i = self.idx(s, a) * w;
        &self.outcome_count[i..i + w]
    }

    /// `M⁺ = max{1, M}`.
    pub fn m_plus(&self, s: usize, a: usize) -> f64 {
        self.cost_count(s, a).max(1) as f64
    }

    /// `N⁺ = max{1, N}`.
    pub fn n_plus(&self, s: usize, a: usize) -> f64 {
        self.trans_count(s, a).max(1) as f64
    }

    /// `c̄ = C / M⁺`.
    pub fn mean_cost(&self, s: usize, a: usize) -> f64 {
        self.cost_sum(s, a) / self.m_plus(s, a)
    }
}
