//! Continuum functionals by deterministic quadrature: non-local and local
//! total variation, the smoothing operator `Λ_a`, and property checks.

mod checks;
mod function;
mod grid;
mod kernel;
mod tv;

use crate::manifold::Manifold;

pub use checks::{
    check_bias, check_functional_form, check_monotonicity, check_smoothing_chain, BiasReport, BiasRow,
    FunctionalFormReport, MonotonicityReport, MonotonicityRow, SmoothingChainReport, SubadditivityRow,
    CHECK_CONSTANT,
};
pub use function::{finite_difference_gradient, Constant, ContinuumFunction, FamilyIndicator, FnFunction};
pub use grid::QuadratureGrid;
pub use kernel::{smooth, smooth_node_values, Smoothed, SmoothingKernel};
pub(crate) use tv::golden_section;
pub use tv::{
    cheeger_functional_form, crossing_mass, l1_distance, perimeter_reference, surface_tension, tv_local_smooth,
    tv_nonlocal, FunctionalForm,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlocalError {
    #[error("surface tension is tabulated for dimensions 1 to 3, got {m}")]
    UnsupportedDimension { m: usize },
    #[error("grid spacing {spacing:.3e} exceeds the required {required:.3e}")]
    ResolutionTooCoarse { spacing: f64, required: f64 },
    #[error("bandwidth {value} exceeds the admissible maximum {limit}")]
    BandwidthTooLarge { value: f64, limit: f64 },
    #[error("invalid value {value} for parameter {name}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("function is essentially constant (L1 deviation from its median {deviation:.3e})")]
    DegenerateFunction { deviation: f64 },
    #[error("function lives on {found}, grid on {expected}")]
    ManifoldMismatch { expected: Manifold, found: Manifold },
    #[error("check needs a closed-form total variation")]
    MissingTotalVariation,
}

pub(crate) fn require_same_manifold(expected: Manifold, found: Manifold) -> Result<(), NonlocalError> {
    if expected != found {
        return Err(NonlocalError::ManifoldMismatch { expected, found });
    }
    Ok(())
}
