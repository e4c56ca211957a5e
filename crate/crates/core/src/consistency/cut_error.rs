use std::sync::Arc;

use serde::Serialize;

use crate::cloud::PointCloud;
use crate::graph::VertexSet;
use crate::manifold::{CheegerReference, FamilyMember};
use crate::nonlocal::{ContinuumFunction, QuadratureGrid, SmoothingKernel};
use crate::scalar::Real;

use super::fraenkel::fraenkel_from_values;
use super::transport::{interpolate, transport_assign};
use super::ConsistencyError;

/// Continuum and discrete distance of a graph cut from the minimizer family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutError {
    /// `min_p ‖1_{E_n} ∘ T_n − 1_{E*(p)}‖_{L¹}`.
    pub l1_error: f64,
    pub matched: FamilyMember,
    /// Fraction of sample points on the wrong side of the matched member.
    pub misclassified: f64,
    pub sup_displacement: f64,
}

/// Lift the vertex indicator of `subset` to the grid through the transport
/// surrogate (optionally smoothed with bandwidth `a` and thresholded at ½)
/// and match it against the family of `reference`.
pub fn cut_l1_error<T: Real>(
    subset: &VertexSet,
    cloud: &PointCloud<T>,
    reference: &CheegerReference,
    bandwidth: Option<f64>,
    grid: Arc<QuadratureGrid>,
) -> Result<CutError, ConsistencyError> {
    let n = cloud.len();
    let surrogate = transport_assign(cloud, grid.coords())?;
    let mask = subset.mask(n);
    let u: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let values = match bandwidth {
        None => surrogate.pullback(&u),
        Some(a) => {
            let kernel = SmoothingKernel::for_manifold(cloud.manifold(), a)?;
            let lifted = interpolate(&u, &surrogate, kernel, grid.clone())?;
            (0..grid.len()).map(|i| if lifted.eval(grid.node(i)) >= 0.5 { 1.0 } else { 0.0 }).collect()
        }
    };
    let matched = fraenkel_from_values(&values, reference, &grid);
    let wrong = (0..n)
        .filter(|&i| {
            let x: Vec<f64> = cloud.point(i).iter().map(|c| c.as_f64()).collect();
            matched.member.contains(&x) != mask[i]
        })
        .count();
    Ok(CutError {
        l1_error: matched.asymmetry,
        matched: matched.member,
        misclassified: wrong as f64 / n as f64,
        sup_displacement: surrogate.sup_displacement,
    })
}

/// Grid used to measure cut errors: fine enough that its own error is far
/// below the transport displacement at the sample sizes of interest.
pub fn default_error_grid(reference: &CheegerReference) -> QuadratureGrid {
    use crate::manifold::Manifold;
    let resolution = match reference.manifold {
        Manifold::Circle => 8192,
        Manifold::FlatTorus2 => 256,
        Manifold::Sphere2 => 160,
    };
    QuadratureGrid::new(reference.manifold, resolution)
}
