use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::ProximityGraph;
use crate::manifold::{sample, Manifold};
use crate::nonlocal::{surface_tension, ContinuumFunction};
use crate::seed::derive_seed;

use super::ConsistencyError;

/// Rule giving the graph length scale for a sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `ε = c · n^{−exponent} · (ln n)^{log_power}`.
    Power { c: f64, exponent: f64, #[serde(default)] log_power: f64 },
    /// One value per entry of the n-list.
    Explicit { values: Vec<f64> },
}

impl EpsilonRule {
    pub fn epsilon(&self, n: usize, position: usize) -> Option<f64> {
        match self {
            EpsilonRule::Power { c, exponent, log_power } => {
                let n = n as f64;
                Some(c * n.powf(-exponent) * n.ln().powf(*log_power))
            }
            EpsilonRule::Explicit { values } => values.get(position).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub zeta: f64,
    pub threshold: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UstatRow {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
    pub exceedance: Vec<Exceedance>,
}

/// Empirical concentration of `GTV_{n,ε}(f)` at sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UstatReport {
    pub manifold: Manifold,
    pub seed: u64,
    pub sigma: f64,
    pub total_variation: f64,
    /// `σ_η TV(f)`, the limit of the mean.
    pub reference: f64,
    pub rows: Vec<UstatRow>,
    /// Sample standard deviation strictly decreases along the n-list.
    pub std_monotone: bool,
}

/// For each `n`, sample `trials` clouds, evaluate `GTV_{n,ε}(f)` at the
/// sample points and summarize; exceedances are counted against
/// `σ_η TV(f)(1 + 10ε²) + ζ` for every `ζ` in `zetas`.
pub fn ustat_concentration<F: ContinuumFunction + ?Sized>(
    f: &F,
    n_list: &[usize],
    rule: &EpsilonRule,
    trials: usize,
    seed: u64,
    zetas: &[f64],
) -> Result<UstatReport, ConsistencyError> {
    let manifold = f.manifold();
    let sigma = surface_tension(manifold.intrinsic_dim())?;
    let total_variation = f.total_variation().ok_or(ConsistencyError::MissingTotalVariation)?;
    if trials < 2 {
        return Err(ConsistencyError::InsufficientData { reason: "need at least two trials".into() });
    }
    let reference = sigma * total_variation;
    let mut rows = Vec::new();
    for (pos, &n) in n_list.iter().enumerate() {
        let epsilon = rule
            .epsilon(n, pos)
            .ok_or(ConsistencyError::InsufficientData { reason: format!("no ε for n = {n}") })?;
        let values: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<f64, ConsistencyError> {
                let cloud = sample::<f64>(manifold, n, derive_seed(seed, "ustat", &[n as u64, t as u64]));
                let u: Vec<f64> = cloud.points().map(|x| f.eval(x)).collect();
                let graph = ProximityGraph::build(cloud, epsilon)?;
                Ok(graph.gtv(&u)?)
            })
            .collect::<Result<_, _>>()?;
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt();
        let exceedance = zetas
            .iter()
            .map(|&zeta| {
                let threshold = reference * (1.0 + 10.0 * epsilon * epsilon) + zeta;
                let fraction = values.iter().filter(|&&v| v > threshold).count() as f64 / k;
                Exceedance { zeta, threshold, fraction }
            })
            .collect();
        rows.push(UstatRow { n, epsilon, trials, mean, std, values, exceedance });
    }
    let std_monotone = rows.windows(2).all(|w| w[1].std < w[0].std);
    Ok(UstatReport { manifold, seed, sigma, total_variation, reference, rows, std_monotone })
}
