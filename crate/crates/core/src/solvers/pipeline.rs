use std::collections::VecDeque;
use std::time::Instant;

use crate::graph::{Objective, ProximityGraph, VertexSet};
use crate::manifold::Manifold;
use crate::scalar::Real;

use super::lanczos::laplacian_eigenpairs;
use super::spectral::sorted_order;
use super::{
    cloud_manifold, component_split, eigenspace_search, refine_local_search, require_vertices, solve_arc_sweep,
    sweep_cut, Certificate, CutResult, Incumbent, SolverError, SolverKind,
};

/// Tuning knobs of [`solve_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub seed: u64,
    /// Number of low eigenvectors spanning the direction search, per intrinsic dimension.
    pub eigenvectors_per_dim: usize,
    pub random_directions: usize,
    pub refine_steps: usize,
    pub max_passes: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            eigenvectors_per_dim: 2,
            random_directions: 16,
            refine_steps: 32,
            max_passes: 20_000,
        }
    }
}

/// Default estimator of the graph Cheeger constant.
///
/// Candidates: the Fiedler sweep, a direction search in the span of the low
/// eigenvectors and, on circle clouds, the arc sweep. Each candidate is
/// polished by local search and the best one is returned. The value is an
/// upper bound on the true minimum. When the eigensolver fails the result is
/// built from the remaining candidates plus a breadth-first sweep.
pub fn solve_pipeline<T: Real>(
    graph: &ProximityGraph<T>,
    objective: Objective,
    options: PipelineOptions,
) -> Result<CutResult<T>, SolverError> {
    let started = Instant::now();
    require_vertices(graph)?;
    let n = graph.len();
    let mut candidates: Vec<VertexSet> = Vec::new();
    let mut eigen_residual = None;

    if let Some(component) = component_split(graph) {
        candidates.push(component);
    } else {
        let nev = (options.eigenvectors_per_dim * graph.intrinsic_dim().max(1)).min(n - 1);
        let pairs = laplacian_eigenpairs(graph, nev, options.seed)
            .or_else(|_| laplacian_eigenpairs(graph, 1, options.seed));
        match pairs {
            Ok(pairs) => {
                eigen_residual = Some(pairs.residual);
                candidates.push(sweep_cut(graph, &sorted_order(&pairs.vectors[0]), objective).0);
                if pairs.vectors.len() > 1 {
                    let (set, _) = eigenspace_search(
                        graph,
                        &pairs.vectors,
                        objective,
                        options.seed ^ 0x9e37_79b9_7f4a_7c15,
                        options.random_directions,
                        options.refine_steps,
                    );
                    candidates.push(set);
                }
            }
            Err(_) => candidates.push(sweep_cut(graph, &bfs_order(graph), objective).0),
        }
        if cloud_manifold(graph) == Some(Manifold::Circle) {
            candidates.push(solve_arc_sweep(graph, objective)?.subset);
        }
    }

    let mut best = Incumbent::new();
    for set in candidates {
        if set.is_empty() || set.len() >= n {
            continue;
        }
        let start = CutResult::evaluate(graph, &set, objective, SolverKind::Pipeline, Certificate::Heuristic, started)?;
        let polished = refine_local_search(graph, &start, options.max_passes)?;
        best.offer(polished.objective, polished.subset, VertexSet::clone);
    }
    let subset = best.into_subset(VertexSet::clone).unwrap_or_else(|| VertexSet::new(vec![0]));
    Ok(
        CutResult::evaluate(graph, &subset, objective, SolverKind::Pipeline, Certificate::Heuristic, started)?
            .with_eigen_residual(eigen_residual),
    )
}

/// Breadth-first order from vertex 0, remaining components appended in index order.
fn bfs_order<T: Real>(graph: &ProximityGraph<T>) -> Vec<usize> {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &j in graph.neighbors(v) {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    queue.push_back(j as usize);
                }
            }
        }
    }
    order
}
