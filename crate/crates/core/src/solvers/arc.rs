use std::time::Instant;

use rayon::prelude::*;

use crate::graph::{Objective, ProximityGraph, VertexSet};
use crate::manifold::Manifold;
use crate::scalar::Real;

use super::{cloud_manifold, require_vertices, Certificate, CutResult, Incumbent, SolverError, SolverKind};

/// Exact minimizer over subsets that are contiguous arcs in angular order.
///
/// Every objective here is complement-symmetric and the complement of an arc
/// is an arc, so arcs of at most `n/2` vertices suffice.
pub fn solve_arc_sweep<T: Real>(graph: &ProximityGraph<T>, objective: Objective) -> Result<CutResult<T>, SolverError> {
    let started = Instant::now();
    match cloud_manifold(graph) {
        Some(Manifold::Circle) => {}
        other => {
            return Err(SolverError::WrongManifold {
                found: other.map_or_else(|| "no geometry".to_string(), |m| m.to_string()),
            })
        }
    }
    require_vertices(graph)?;
    let cloud = graph.cloud().expect("checked above");
    let n = graph.len();

    let angle: Vec<f64> = (0..n).map(|i| Manifold::Circle.intrinsic(cloud.point(i))[0].as_f64()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angle[a].total_cmp(&angle[b]).then(a.cmp(&b)));
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    // circular offsets of each vertex's neighbors in the angular order, ascending
    let offsets: Vec<Vec<u32>> = order
        .iter()
        .map(|&v| {
            let mut o: Vec<u32> = graph
                .neighbors(v)
                .iter()
                .map(|&j| ((pos[j as usize] + n - pos[v]) % n) as u32)
                .collect();
            o.sort_unstable();
            o
        })
        .collect();

    let max_len = n / 2;
    let arc_set = |&(start, len): &(usize, usize)| {
        VertexSet::new((0..len).map(|t| order[(start + t) % n]).collect()).canonical(n)
    };
    let per_start: Vec<Incumbent<T, (usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut best = Incumbent::new();
            let mut cut: i64 = 0;
            for len in 1..=max_len {
                let p = (start + len - 1) % n;
                let o = &offsets[p];
                // neighbors already in the arc sit at offsets n - (len - 1) ..= n - 1
                let inside = o.len() - o.partition_point(|&x| (x as usize) < n - (len - 1));
                cut += o.len() as i64 - 2 * inside as i64;
                let value = graph.objective_from_counts(cut as u64, len, objective).value;
                best.offer(value, (start, len), arc_set);
            }
            best
        })
        .collect();
    let mut best = Incumbent::new();
    for cand in per_start {
        if let Some(key) = cand.key {
            best.offer(cand.value, key, arc_set);
        }
    }
    let subset = best.into_subset(arc_set).expect("n ≥ 2 gives at least one arc");
    CutResult::evaluate(graph, &subset, objective, SolverKind::ArcSweep, Certificate::FamilyOptimum, started)
}
