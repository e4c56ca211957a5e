use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::manifold::Manifold;
use crate::nonlocal::{smooth_node_values, QuadratureGrid, Smoothed, SmoothingKernel};
use crate::scalar::Real;
use crate::spatial::SpatialHash;

use super::ConsistencyError;

/// Nearest-sample assignment standing in for the transport map `T_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSurrogate {
    /// Index of the nearest sample point for every evaluation node.
    pub assignment: Vec<u32>,
    /// Largest geodesic distance between a node and its assigned sample.
    pub sup_displacement: f64,
}

/// Assign each node (ambient coordinates, row-major) to its geodesically
/// nearest sample point, ties to the smallest index.
pub fn transport_assign<T: Real>(cloud: &PointCloud<T>, nodes: &[f64]) -> Result<TransportSurrogate, ConsistencyError> {
    let n = cloud.len();
    if n == 0 {
        return Err(ConsistencyError::EmptyCloud);
    }
    let manifold = cloud.manifold();
    let d = manifold.ambient_dim();
    let points: Vec<f64> = cloud.coords().iter().map(|c| c.as_f64()).collect();
    let m = manifold.intrinsic_dim() as f64;
    // typical nearest-neighbour distance, so the first query usually succeeds
    let cell = (2.0 * (1.0 / n as f64).powf(1.0 / m)).min(1.0);
    let index = SpatialHash::build(&points, d, cell);
    let limit = manifold.max_ball_radius() * 2.0;

    let nearest: Vec<(u32, f64)> = nodes
        .par_chunks_exact(d)
        .map(|x| {
            let mut radius = cell;
            loop {
                let mut best = (u32::MAX, f64::INFINITY);
                index.for_each_candidate(x, radius, |j| {
                    let dist = manifold.geodesic_distance(x, &points[j as usize * d..(j as usize + 1) * d]);
                    if dist < best.1 || (dist == best.1 && j < best.0) {
                        best = (j, dist);
                    }
                });
                // every point within geodesic distance `radius` is within chord `radius`
                if best.1 <= radius || radius > limit {
                    return best;
                }
                radius *= 2.0;
            }
        })
        .collect();
    let sup_displacement = nearest.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(TransportSurrogate { assignment: nearest.into_iter().map(|p| p.0).collect(), sup_displacement })
}

impl TransportSurrogate {
    /// Pull back vertex values: `(u ∘ T_n)` at every node.
    pub fn pullback(&self, u: &[f64]) -> Vec<f64> {
        self.assignment.iter().map(|&j| u[j as usize]).collect()
    }
}

/// Interpolation `I_a u = Λ_a(u ∘ T_n)`, with `surrogate` computed on the nodes of `grid`.
pub fn interpolate(
    u: &[f64],
    surrogate: &TransportSurrogate,
    kernel: SmoothingKernel,
    grid: Arc<QuadratureGrid>,
) -> Result<Smoothed, ConsistencyError> {
    let a = kernel.bandwidth();
    if a < 2.0 * surrogate.sup_displacement {
        return Err(ConsistencyError::BandwidthTooSmall { a, displacement: surrogate.sup_displacement });
    }
    if surrogate.assignment.len() != grid.len() {
        return Err(ConsistencyError::LengthMismatch { got: surrogate.assignment.len(), expected: grid.len() });
    }
    if let Some(&j) = surrogate.assignment.iter().find(|&&j| j as usize >= u.len()) {
        return Err(ConsistencyError::LengthMismatch { got: u.len(), expected: j as usize + 1 });
    }
    let sup = u.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    Ok(smooth_node_values(surrogate.pullback(u), Some(sup), kernel, grid)?)
}

/// Uniform grid of `n` points on the circle, for covering-radius checks.
pub fn circle_grid_cloud(n: usize) -> PointCloud<f64> {
    let m = Manifold::Circle;
    let mut coords = vec![0.0; 2 * n];
    for i in 0..n {
        m.embed(&[i as f64 / n as f64], &mut coords[2 * i..2 * i + 2]);
    }
    PointCloud::new(m, 0, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{sample, FamilyMember};
    use crate::nonlocal::{l1_distance, ContinuumFunction, FamilyIndicator};

    #[test]
    fn grid_cloud_covering_radius() {
        let n = 100;
        let cloud = circle_grid_cloud(n);
        let nodes = QuadratureGrid::new(Manifold::Circle, 10 * n);
        let t = transport_assign(&cloud, nodes.coords()).unwrap();
        let half = 1.0 / (2.0 * n as f64);
        assert!(t.sup_displacement <= half && t.sup_displacement >= half - nodes.spacing(), "{}", t.sup_displacement);
    }

    #[test]
    fn single_point_takes_everything() {
        for m in Manifold::ALL {
            let cloud = sample::<f64>(m, 1, 3);
            let nodes = QuadratureGrid::new(m, 12);
            let t = transport_assign(&cloud, nodes.coords()).unwrap();
            assert!(t.assignment.iter().all(|&j| j == 0));
            let far = (0..nodes.len()).map(|i| m.geodesic_distance(nodes.node(i), cloud.point(0))).fold(0.0, f64::max);
            assert_eq!(t.sup_displacement, far);
        }
    }

    #[test]
    fn assignment_is_the_brute_force_nearest() {
        for m in Manifold::ALL {
            let cloud = sample::<f64>(m, 300, 11);
            let nodes = QuadratureGrid::new(m, 20);
            let t = transport_assign(&cloud, nodes.coords()).unwrap();
            for i in 0..nodes.len() {
                let x = nodes.node(i);
                let mut best = (0usize, f64::INFINITY);
                for j in 0..cloud.len() {
                    let d = m.geodesic_distance(x, cloud.point(j));
                    if d < best.1 {
                        best = (j, d);
                    }
                }
                assert_eq!(t.assignment[i] as usize, best.0, "{m} node {i}");
            }
        }
    }

    #[test]
    fn interpolation_of_a_sampled_half_arc() {
        let m = Manifold::Circle;
        let cloud = sample::<f64>(m, 4000, 5);
        let member = FamilyMember::HalfArc { center: 0.25 };
        let u: Vec<f64> = cloud.points().map(|x| if member.contains(x) { 1.0 } else { 0.0 }).collect();
        let grid = Arc::new(QuadratureGrid::new(m, 4000));
        let t = transport_assign(&cloud, grid.coords()).unwrap();
        let a = 0.05;
        let lifted = interpolate(&u, &t, SmoothingKernel::new(1, a).unwrap(), grid.clone()).unwrap();
        let err = l1_distance(&lifted, &FamilyIndicator(member), &grid);
        assert!(err <= 2.0 * a + 2.0 * t.sup_displacement, "{err}");
        for i in 0..grid.len() {
            let v = lifted.eval(grid.node(i));
            assert!((0.0..=1.0).contains(&v));
        }
        let ones = vec![0.7; cloud.len()];
        let c = interpolate(&ones, &t, SmoothingKernel::new(1, a).unwrap(), grid.clone()).unwrap();
        assert_eq!(c.eval(grid.node(17)), 0.7);
        let tiny = SmoothingKernel::new(1, t.sup_displacement).unwrap();
        assert!(matches!(interpolate(&u, &t, tiny, grid), Err(ConsistencyError::BandwidthTooSmall { .. })));
    }
}
