use std::time::Instant;

use crate::graph::{Objective, ProximityGraph, VertexSet};
use crate::scalar::Real;

use super::{require_vertices, Certificate, CutResult, Incumbent, SolverError, SolverKind};

/// Largest graph handled by exhaustive enumeration.
pub const EXACT_LIMIT: usize = 24;

/// Global minimizer over all proper bipartitions, by Gray-code enumeration of
/// the subsets that contain vertex 0.
pub fn solve_exact<T: Real>(graph: &ProximityGraph<T>, objective: Objective) -> Result<CutResult<T>, SolverError> {
    let started = Instant::now();
    let n = graph.len();
    if n > EXACT_LIMIT {
        return Err(SolverError::SizeLimitExceeded { n, limit: EXACT_LIMIT });
    }
    require_vertices(graph)?;

    let adj: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |acc, &j| acc | (1 << j)))
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let to_set = |mask: u32| VertexSet::new((0..n).filter(|&v| mask >> v & 1 == 1).collect());

    let mut mask: u32 = 1;
    let mut cut: i64 = adj[0].count_ones() as i64;
    let mut best = Incumbent::new();
    let total: u64 = 1u64 << (n - 1);
    for step in 0..total {
        if step > 0 {
            let v = step.trailing_zeros() as usize + 1;
            let inside = (adj[v] & mask).count_ones() as i64;
            let deg = adj[v].count_ones() as i64;
            if mask >> v & 1 == 1 {
                mask &= !(1 << v);
                cut += 2 * inside - deg;
            } else {
                mask |= 1 << v;
                cut += deg - 2 * inside;
            }
        }
        if mask == full {
            continue;
        }
        let k = mask.count_ones() as usize;
        let value = graph.objective_from_counts(cut as u64, k, objective).value;
        best.offer(value, mask, |&m| to_set(m));
    }
    let subset = best.into_subset(|&m| to_set(m)).expect("at least one proper bipartition");
    CutResult::evaluate(graph, &subset, objective, SolverKind::Exact, Certificate::GlobalOptimum, started)
}
