use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::RegretLedger;

/// Ordinary least squares fit `y = a + b x`; returns `(a, b)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Slope of `log mean R_K` against `log K` over groups keyed by `K`.
pub fn loglog_slope(groups: &BTreeMap<usize, Vec<f64>>) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need ledgers at two or more distinct K, got {}",
            groups.len()
        )));
    }
    let mut xs = Vec::with_capacity(groups.len());
    let mut ys = Vec::with_capacity(groups.len());
    for (&k, regrets) in groups {
        let mean = regrets.iter().sum::<f64>() / regrets.len() as f64;
        if mean <= 0.0 || !mean.is_finite() {
            return Err(Error::InsufficientData(format!("mean R_K = {mean} at K = {k} has no logarithm")));
        }
        xs.push((k as f64).ln());
        ys.push(mean.ln());
    }
    Ok(ols(&xs, &ys)?.1)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap: usize,
    /// Mean `R_K` divided by the baseline's mean at the same `K`.
    pub baseline_ratio: Option<Vec<(usize, f64)>>,
}

fn group(ledgers: &[RegretLedger]) -> BTreeMap<usize, Vec<f64>> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for l in ledgers {
        groups.entry(l.episodes()).or_default().push(l.summary.regret);
    }
    groups
}

/// Fits the regret growth exponent with a seeded percentile bootstrap
/// (resampling runs within each `K`) at 95% coverage.
pub fn trend_report(
    ledgers: &[RegretLedger],
    baseline: &[RegretLedger],
    resamples: usize,
    seed: u64,
) -> Result<TrendReport> {
    let groups = group(ledgers);
    let slope = loglog_slope(&groups)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let sample: BTreeMap<usize, Vec<f64>> = groups
            .iter()
            .map(|(&k, v)| (k, (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).collect()))
            .collect();
        if let Ok(s) = loglog_slope(&sample) {
            draws.push(s);
        }
    }
    draws.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        if draws.is_empty() {
            f64::NAN
        } else {
            draws[((q * (draws.len() - 1) as f64).round() as usize).min(draws.len() - 1)]
        }
    };
    let mean_of = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let points = groups.iter().map(|(&k, v)| (k, mean_of(v))).collect();
    let baseline_ratio = (!baseline.is_empty()).then(|| {
        let base = group(baseline);
        groups
            .iter()
            .filter_map(|(k, v)| base.get(k).map(|b| (*k, mean_of(v) / mean_of(b))))
            .collect()
    });
    Ok(TrendReport {
        points,
        slope,
        ci_low: pick(0.025),
        ci_high: pick(0.975),
        bootstrap: draws.len(),
        baseline_ratio,
    })
}
