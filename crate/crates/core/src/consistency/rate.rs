use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::ConsistencyError;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const MIN_SIZES: usize = 3;
const MIN_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub median: f64,
    pub trials: usize,
}

/// Log-log least-squares fit of median error against `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Bootstrap 90% percentile interval of the slope.
    pub slope_ci: [f64; 2],
    pub resamples: usize,
    pub points: Vec<RatePoint>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn log_fit(groups: &[(usize, Vec<f64>)]) -> (f64, f64) {
    let x: Vec<f64> = groups.iter().map(|g| (g.0 as f64).ln()).collect();
    // zero medians are floored so the logarithm stays finite
    let y: Vec<f64> = groups.iter().map(|g| median(&g.1).max(f64::MIN_POSITIVE).ln()).collect();
    least_squares(&x, &y)
}

/// Fit the decay rate of per-`n` error samples; bootstrap resamples trials within each `n`.
pub fn fit_rate(records: &BTreeMap<usize, Vec<f64>>, seed: u64) -> Result<RateFit, ConsistencyError> {
    let groups: Vec<(usize, Vec<f64>)> = records
        .iter()
        .map(|(&n, v)| (n, v.iter().copied().filter(|e| e.is_finite()).collect::<Vec<_>>()))
        .collect();
    if groups.len() < MIN_SIZES {
        return Err(ConsistencyError::InsufficientData { reason: format!("{} distinct n, need {MIN_SIZES}", groups.len()) });
    }
    if let Some((n, v)) = groups.iter().find(|g| g.1.len() < MIN_TRIALS) {
        return Err(ConsistencyError::InsufficientData {
            reason: format!("{} usable trials at n = {n}, need {MIN_TRIALS}", v.len()),
        });
    }
    let (slope, intercept) = log_fit(&groups);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let resampled: Vec<(usize, Vec<f64>)> = groups
                .iter()
                .map(|(n, v)| (*n, (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect()))
                .collect();
            log_fit(&resampled).0
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let pick = |q: f64| slopes[((q * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    Ok(RateFit {
        slope,
        intercept,
        slope_ci: [pick(0.05), pick(0.95)],
        resamples: BOOTSTRAP_RESAMPLES,
        points: groups.iter().map(|(n, v)| RatePoint { n: *n, median: median(v), trials: v.len() }).collect(),
    })
}
