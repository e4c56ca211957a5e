use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{Objective, ProximityGraph, VertexSet};
use crate::scalar::Real;

use super::lanczos::laplacian_eigenpairs;
use super::{component_split, require_vertices, Certificate, CutResult, Incumbent, SolverError, SolverKind};

/// Best threshold cut of a vertex ordering: the minimum of the objective over
/// the `n − 1` proper prefixes of `order`.
pub fn sweep_cut<T: Real>(graph: &ProximityGraph<T>, order: &[usize], objective: Objective) -> (VertexSet, T) {
    let n = graph.len();
    let mut in_set = vec![false; n];
    let mut cut: i64 = 0;
    let prefix = |&k: &usize| VertexSet::new(order[..=k].to_vec()).canonical(n);
    let mut best = Incumbent::new();
    for (k, &v) in order.iter().enumerate().take(n.saturating_sub(1)) {
        let nb = graph.neighbors(v);
        let inside = nb.iter().filter(|&&j| in_set[j as usize]).count() as i64;
        cut += nb.len() as i64 - 2 * inside;
        in_set[v] = true;
        let value = graph.objective_from_counts(cut as u64, k + 1, objective).value;
        best.offer(value, k, prefix);
    }
    let value = best.value;
    (best.into_subset(prefix).unwrap_or_else(VertexSet::empty), value)
}

/// Vertices sorted by ascending value, ties by index.
pub(crate) fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Sweep cut of the Fiedler vector of `L = D − W`.
pub fn solve_spectral_sweep<T: Real>(
    graph: &ProximityGraph<T>,
    objective: Objective,
    seed: u64,
) -> Result<CutResult<T>, SolverError> {
    let started = Instant::now();
    require_vertices(graph)?;
    if let Some(component) = component_split(graph) {
        return CutResult::evaluate(graph, &component, objective, SolverKind::SpectralSweep, Certificate::Heuristic, started);
    }
    let pairs = laplacian_eigenpairs(graph, 1, seed)?;
    let (subset, _) = sweep_cut(graph, &sorted_order(&pairs.vectors[0]), objective);
    Ok(
        CutResult::evaluate(graph, &subset, objective, SolverKind::SpectralSweep, Certificate::Heuristic, started)?
            .with_eigen_residual(Some(pairs.residual)),
    )
}

/// Sweep cuts along directions of the span of several low eigenvectors.
///
/// Starts from each eigenvector and from seeded random directions, then
/// hill-climbs on the unit sphere of coefficients. Useful when the second
/// eigenvalue is (nearly) degenerate and a single Fiedler vector mixes modes.
pub fn eigenspace_search<T: Real>(
    graph: &ProximityGraph<T>,
    vectors: &[Vec<f64>],
    objective: Objective,
    seed: u64,
    random_starts: usize,
    refine_steps: usize,
) -> (VertexSet, T) {
    let k = vectors.len();
    let n = graph.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let evaluate = |c: &[f64]| {
        let f: Vec<f64> = (0..n).map(|i| c.iter().zip(vectors).map(|(a, v)| a * v[i]).sum()).collect();
        sweep_cut(graph, &sorted_order(&f), objective)
    };
    let mut best = Incumbent::new();
    let mut best_dir = vec![0.0; k];
    let consider = |c: Vec<f64>, best: &mut Incumbent<T, VertexSet>, best_dir: &mut Vec<f64>| {
        let (set, value) = evaluate(&c);
        if best.offer(value, set, VertexSet::clone) {
            *best_dir = c;
        }
    };
    for i in 0..k {
        let mut c = vec![0.0; k];
        c[i] = 1.0;
        consider(c, &mut best, &mut best_dir);
    }
    if k > 1 {
        for _ in 0..random_starts {
            let c = unit(&mut rng, k, None, 1.0);
            consider(c, &mut best, &mut best_dir);
        }
        let mut step = 0.5;
        for _ in 0..refine_steps {
            let c = unit(&mut rng, k, Some(&best_dir), step);
            let before = best.value;
            consider(c, &mut best, &mut best_dir);
            if best.value >= before || best.value.is_nan() {
                step *= 0.8;
            }
        }
    }
    let value = best.value;
    (best.into_subset(VertexSet::clone).unwrap_or_else(VertexSet::empty), value)
}

fn unit(rng: &mut ChaCha20Rng, k: usize, around: Option<&[f64]>, step: f64) -> Vec<f64> {
    let mut c: Vec<f64> = (0..k)
        .map(|i| {
            let g: f64 = StandardNormal.sample(rng);
            around.map_or(0.0, |a| a[i]) + step * g
        })
        .collect();
    let len = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    c.iter_mut().for_each(|x| *x /= len);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointCloud;
    use crate::manifold::Manifold;
    use crate::solvers::solve_exact;

    fn two_arcs(seed: u64) -> PointCloud<f64> {
        // arcs [0, 0.08] and [0.12, 0.20] with spacing 0.01, labels interleaved by seed
        let m = Manifold::Circle;
        let n = 18;
        let mut coords = vec![0.0; 2 * n];
        for i in 0..n {
            let slot = (i * 7 + seed as usize) % n;
            let th = if slot < 9 { 0.01 * slot as f64 } else { 0.12 + 0.01 * (slot - 9) as f64 };
            m.embed(&[th], &mut coords[2 * i..2 * i + 2]);
        }
        PointCloud::new(m, seed, coords)
    }

    #[test]
    fn planted_clusters_recovered() {
        let r: f64 = Manifold::Circle.scale();
        let eps = 2.0 * r * (std::f64::consts::PI * 0.045).sin();
        for seed in 0..5 {
            let g = ProximityGraph::build(two_arcs(seed), eps).unwrap();
            assert!(g.is_connected());
            let e = solve_exact(&g, Objective::CheegerRatio).unwrap();
            assert_eq!(e.subset.len(), 9);
            let s = solve_spectral_sweep(&g, Objective::CheegerRatio, 3).unwrap();
            assert_eq!(s.subset, e.subset);
        }
    }

    #[test]
    fn complete_graph_sweep_value_is_recomputable() {
        let n = 10;
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let g = ProximityGraph::<f64>::from_edges(n, 0.5, 1, &edges).unwrap();
        let r = solve_spectral_sweep(&g, Objective::CheegerRatio, 1).unwrap();
        let direct = g.objective(&r.subset, Objective::CheegerRatio).unwrap().value;
        assert_eq!(r.objective, direct);
    }

    #[test]
    fn disconnected_graph_gives_zero() {
        let g = ProximityGraph::<f64>::from_edges(5, 0.5, 1, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let r = solve_spectral_sweep(&g, Objective::CheegerRatio, 1).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.subset.members(), &[0, 1]);
    }

    #[test]
    fn sweep_prefix_cut_matches_recount() {
        let g = ProximityGraph::build(crate::manifold::sample::<f64>(Manifold::FlatTorus2, 300, 8), 0.15).unwrap();
        let order: Vec<usize> = (0..300).rev().collect();
        let (set, value) = sweep_cut(&g, &order, Objective::RatioCut);
        assert_eq!(g.objective(&set, Objective::RatioCut).unwrap().value, value);
    }
}
