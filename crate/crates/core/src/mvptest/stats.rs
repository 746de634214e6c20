/// Running sums over the current cost window (since the last cost reset)
/// and transition window (since the last transition reset).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TestStats {
    /// `χ̂^c`: Σ (c − ĉ) over the cost window.
    pub chi_c_hat: f64,
    /// `χ̂^P`: Σ (V̌_{h+1}(s') − P̂V̌_{h+1}) over the transition window.
    pub chi_p_hat: f64,
    /// Suffered cost including terminal costs, cost window.
    pub cost_c: f64,
    /// Σ (√(c̄ι/M⁺) + ι/M⁺), cost window.
    pub cost_conf: f64,
    /// Σ H_m ρ^c_m, cost window.
    pub rho_c: f64,
    /// Σ 𝕍(P̂, V̌), transition window.
    pub var: f64,
    /// Σ √(𝕍(P̂, V̌)/N⁺), transition window.
    pub var_sqrt: f64,
    /// Suffered cost including terminal costs, transition window.
    pub cost_p: f64,
    /// Σ H_m η_m, transition window.
    pub eta: f64,
    /// Cost resets since the last transition reset.
    pub cost_resets: u64,
}

impl TestStats {
    pub fn clear_cost(&mut self) {
        self.chi_c_hat = 0.0;
        self.cost_c = 0.0;
        self.cost_conf = 0.0;
        self.rho_c = 0.0;
    }

    pub fn clear_transitions(&mut self) {
        self.chi_p_hat = 0.0;
        self.var = 0.0;
        self.var_sqrt = 0.0;
        self.cost_p = 0.0;
        self.eta = 0.0;
        self.cost_resets = 0;
    }
}

/// Problem scalars that enter the transition threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdScales {
    pub b_star: f64,
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
}

/// `χ^c = κ_c [√C + Σ(√(c̄ι/M⁺) + ι/M⁺)] + Σ H_m ρ^c_m`; zero for an empty window.
pub fn threshold_chi_c(stats: &TestStats, kappa_c: f64, nu_c: u64) -> f64 {
    if nu_c == 0 {
        return 0.0;
    }
    kappa_c * (stats.cost_c.sqrt() + stats.cost_conf) + stats.rho_c
}

/// `χ^P = κ_P [√Σ𝕍 + Σ√(𝕍/N⁺) + √(SA(B⋆+L)C) + √(B⋆SAν^P) + B⋆^{5/2}S²AHL] + 4 Σ H_m η_m`
/// with `L = 1 + cost resets in the window`; zero for an empty window.
pub fn threshold_chi_p(stats: &TestStats, kappa_p: f64, nu_p: u64, k: &ThresholdScales) -> f64 {
    if nu_p == 0 {
        return 0.0;
    }
    let (s, a) = (k.num_states as f64, k.num_actions as f64);
    let l = 1.0 + stats.cost_resets as f64;
    let inner = stats.var.sqrt()
        + stats.var_sqrt
        + (s * a * (k.b_star + l) * stats.cost_p).sqrt()
        + (k.b_star * s * a * nu_p as f64).sqrt()
        + k.b_star.powf(2.5) * s * s * a * k.horizon as f64 * l;
    // avoid 0 · ∞ when κ_P is used as an off switch
    let scaled = if kappa_p.is_infinite() { f64::INFINITY } else { kappa_p * inner };
    scaled + 4.0 * stats.eta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_threshold_by_hand() {
        let stats = TestStats { cost_c: 100.0, cost_conf: 10.0, rho_c: 1.0, ..Default::default() };
        assert_eq!(threshold_chi_c(&stats, 3.0, 5), 61.0);
        assert_eq!(threshold_chi_c(&TestStats::default(), 3.0, 0), 0.0);
        assert_eq!(threshold_chi_c(&stats, 0.0, 5), 1.0);
    }

    #[test]
    fn transition_threshold_with_zero_variance() {
        let k = ThresholdScales { b_star: 2.0, num_states: 3, num_actions: 2, horizon: 10 };
        let stats = TestStats { eta: 0.25, ..Default::default() };
        let want = 3.0 * ((2.0f64 * 6.0).sqrt() + 2f64.powf(2.5) * 9.0 * 2.0 * 10.0) + 1.0;
        assert!((threshold_chi_p(&stats, 3.0, 1, &k) - want).abs() < 1e-12);
        assert_eq!(threshold_chi_p(&stats, 3.0, 0, &k), 0.0);
        assert_eq!(threshold_chi_p(&stats, f64::INFINITY, 1, &k), f64::INFINITY);
    }

    #[test]
    fn clears_touch_only_their_window() {
        let mut s = TestStats {
            chi_c_hat: 1.0,
            chi_p_hat: 2.0,
            cost_c: 3.0,
            cost_conf: 4.0,
            rho_c: 5.0,
            var: 6.0,
            var_sqrt: 7.0,
            cost_p: 8.0,
            eta: 9.0,
            cost_resets: 2,
        };
        let before = s;
        s.clear_cost();
        assert_eq!((s.chi_p_hat, s.var, s.var_sqrt, s.cost_p, s.eta), (2.0, 6.0, 7.0, 8.0, 9.0));
        assert_eq!(s.cost_resets, before.cost_resets);
        s.clear_transitions();
        assert_eq!(s, TestStats::default());
    }
}
