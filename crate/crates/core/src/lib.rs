//! Graph-based Cheeger cuts on sampled reference manifolds.
//!
//! The discrete layer (point clouds, ε-graphs, graph functionals, cut
//! solvers) is generic over [`Real`]. The continuum quadrature, the
//! consistency bridge and the experiment harness work in `f64`.

pub mod cloud;
pub mod consistency;
pub mod graph;
pub mod harness;
pub mod manifold;
pub mod nonlocal;
pub mod scalar;
pub mod seed;
pub mod solvers;
pub mod spatial;

pub use cloud::{CloudIoError, CloudMeta, PointCloud};
pub use graph::{CutBalance, GraphError, GraphMeta, Objective, ObjectiveValue, ProximityGraph, VertexSet};
pub use manifold::{continuum_cheeger, sample, CheegerReference, FamilyMember, Manifold, StripAxis};
pub use scalar::Real;
pub use solvers::{solve_with, Certificate, CutResult, SolverError, SolverKind};


pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type ProximityGraph64 = ProximityGraph<f64>;
pub type ProximityGraph32 = ProximityGraph<f32>;
