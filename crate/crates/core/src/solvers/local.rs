use std::time::Instant;

use crate::graph::ProximityGraph;
use crate::graph::VertexSet;
use crate::scalar::Real;

use super::{Certificate, CutResult, SolverError, SolverKind};

/// Greedy descent by single-vertex moves.
///
/// Each pass applies the move with the smallest resulting objective if it is
/// strictly below the current one (ties to the smallest vertex index). Moves
/// that would empty either side are never taken.
pub fn refine_local_search<T: Real>(
    graph: &ProximityGraph<T>,
    start: &CutResult<T>,
    max_passes: usize,
) -> Result<CutResult<T>, SolverError> {
    let started = Instant::now();
    let n = graph.len();
    let objective = start.objective_kind;
    let k0 = start.subset.len();
    if k0 == 0 || k0 >= n {
        return Err(SolverError::DegenerateStart);
    }
    let mut in_set = start.subset.mask(n);
    let mut inside: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().filter(|&&j| in_set[j as usize]).count() as u32)
        .collect();
    let mut cut = graph.cut_mask(&in_set) as i64;
    let mut k = k0;
    let mut current = graph.objective_from_counts(cut as u64, k, objective).value;
    let mut moved = false;

    for _ in 0..max_passes {
        let mut best: Option<(T, usize, i64)> = None;
        for v in 0..n {
            let deg = graph.degree(v) as i64;
            let a = inside[v] as i64;
            let (new_cut, new_k) = if in_set[v] {
                if k == 1 {
                    continue;
                }
                (cut + 2 * a - deg, k - 1)
            } else {
                if k + 1 == n {
                    continue;
                }
                (cut + deg - 2 * a, k + 1)
            };
            let value = graph.objective_from_counts(new_cut as u64, new_k, objective).value;
            if value < current && best.is_none_or(|(b, _, _)| value < b) {
                best = Some((value, v, new_cut));
            }
        }
        let Some((value, v, new_cut)) = best else { break };
        debug_assert!(value < current);
        let entering = !in_set[v];
        in_set[v] = entering;
        k = if entering { k + 1 } else { k - 1 };
        cut = new_cut;
        for &j in graph.neighbors(v) {
            if entering {
                inside[j as usize] += 1;
            } else {
                inside[j as usize] -= 1;
            }
        }
        current = value;
        moved = true;
    }

    if !moved {
        let mut same = start.clone();
        same.solver = SolverKind::LocalSearch;
        same.elapsed_sec = started.elapsed().as_secs_f64();
        return Ok(same);
    }
    let subset = VertexSet::from_mask(&in_set);
    Ok(CutResult::evaluate(graph, &subset, objective, SolverKind::LocalSearch, Certificate::Heuristic, started)?
        .with_eigen_residual(start.eigen_residual))
}
