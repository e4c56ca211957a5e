//! Bridge between graph cuts and the continuum: transport surrogate,
//! interpolation, Fraenkel asymmetry, mass fixing, concentration and rates.

mod cut_error;
mod fraenkel;
mod mass;
mod rate;
mod stability;
mod transport;
mod ustat;

use crate::graph::GraphError;
use crate::nonlocal::NonlocalError;

pub use cut_error::{cut_l1_error, default_error_grid, CutError};
pub use fraenkel::{fraenkel_asymmetry, fraenkel_from_values, symmetric_difference, FraenkelMatch};
pub use mass::{fix_mass, Ball, MassFix, Region};
pub use rate::{fit_rate, least_squares, median, RateFit, RatePoint, BOOTSTRAP_RESAMPLES};
pub use stability::{stability_check, BoundaryGraph, PerturbedStrip, StabilityReport, StabilityRow};
pub use transport::{circle_grid_cloud, interpolate, transport_assign, TransportSurrogate};
pub use ustat::{ustat_concentration, EpsilonRule, Exceedance, UstatReport, UstatRow};

#[derive(Debug, thiserror::Error)]
pub enum ConsistencyError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("bandwidth {a} is below twice the transport displacement {displacement}")]
    BandwidthTooSmall { a: f64, displacement: f64 },
    #[error("length mismatch: got {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("target volume {target} is infeasible: {reason}")]
    InfeasibleMass { target: f64, reason: &'static str },
    #[error("insufficient data: {reason}")]
    InsufficientData { reason: String },
    #[error("a closed-form total variation is required")]
    MissingTotalVariation,
    #[error(transparent)]
    Nonlocal(#[from] NonlocalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
