//! Exact and heuristic minimizers of the balanced-cut objectives.

mod arc;
mod exact;
mod lanczos;
mod local;
mod pipeline;
mod spectral;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, Objective, ProximityGraph, VertexSet};
use crate::manifold::Manifold;
use crate::scalar::Real;

pub use arc::solve_arc_sweep;
pub use exact::{solve_exact, EXACT_LIMIT};
pub use lanczos::{laplacian_eigenpairs, EigenPairs};
pub use local::refine_local_search;
pub use pipeline::{solve_pipeline, PipelineOptions};
pub use spectral::{eigenspace_search, solve_spectral_sweep, sweep_cut};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    ArcSweep,
    SpectralSweep,
    LocalSearch,
    Pipeline,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::ArcSweep => "arc_sweep",
            SolverKind::SpectralSweep => "spectral_sweep",
            SolverKind::LocalSearch => "local_search",
            SolverKind::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    GlobalOptimum,
    FamilyOptimum,
    Heuristic,
}

impl Certificate {
    pub fn name(self) -> &'static str {
        match self {
            Certificate::GlobalOptimum => "global_optimum",
            Certificate::FamilyOptimum => "family_optimum",
            Certificate::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("exact enumeration supports at most {limit} vertices, graph has {n}")]
    SizeLimitExceeded { n: usize, limit: usize },
    #[error("a bipartition needs at least two vertices, graph has {n}")]
    TooFewVertices { n: usize },
    #[error("arc sweep needs a graph built on a circle cloud, found {found}")]
    WrongManifold { found: String },
    #[error("eigensolver did not converge after {iterations} operator applications (residual {residual:.3e})")]
    EigenNotConverged { iterations: usize, residual: f64 },
    #[error("local search needs a proper starting subset")]
    DegenerateStart,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A bipartition returned by a solver together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResult<T> {
    /// Side of the bipartition containing vertex 0.
    pub subset: VertexSet,
    pub objective: T,
    pub gtv: T,
    pub balance: T,
    #[serde(rename = "method")]
    pub solver: SolverKind,
    pub certificate: Certificate,
    pub elapsed_sec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_residual: Option<f64>,
    #[serde(skip)]
    pub objective_kind: Objective,
}

impl<T: Real> CutResult<T> {
    /// Evaluate `subset` from scratch and package it.
    pub fn evaluate(
        graph: &ProximityGraph<T>,
        subset: &VertexSet,
        objective_kind: Objective,
        solver: SolverKind,
        certificate: Certificate,
        started: Instant,
    ) -> Result<Self, SolverError> {
        let subset = subset.canonical(graph.len());
        let cb = graph.cut_and_balance(&subset)?;
        let objective = graph.objective_from_counts(cb.cut, subset.len(), objective_kind).value;
        Ok(Self {
            subset,
            objective,
            gtv: cb.gtv,
            balance: cb.balance,
            solver,
            certificate,
            elapsed_sec: started.elapsed().as_secs_f64(),
            eigen_residual: None,
            objective_kind,
        })
    }

    pub fn with_eigen_residual(mut self, residual: Option<f64>) -> Self {
        self.eigen_residual = residual;
        self
    }
}

/// Run the solver named by `kind`. Local search starts from the spectral sweep.
pub fn solve_with<T: Real>(
    graph: &ProximityGraph<T>,
    kind: SolverKind,
    objective: Objective,
    seed: u64,
) -> Result<CutResult<T>, SolverError> {
    match kind {
        SolverKind::Exact => solve_exact(graph, objective),
        SolverKind::ArcSweep => solve_arc_sweep(graph, objective),
        SolverKind::SpectralSweep => solve_spectral_sweep(graph, objective, seed),
        SolverKind::LocalSearch => {
            let start = solve_spectral_sweep(graph, objective, seed)?;
            refine_local_search(graph, &start, PipelineOptions::default().max_passes)
        }
        SolverKind::Pipeline => solve_pipeline(graph, objective, PipelineOptions { seed, ..PipelineOptions::default() }),
    }
}

/// Running minimum over candidate bipartitions with the canonical tie-break:
/// equal objective values are resolved by the lexicographically smallest
/// canonical subset. Candidates are identified by a cheap key and only
/// materialized when a tie has to be resolved.
#[derive(Debug, Clone)]
pub(crate) struct Incumbent<T, K> {
    pub value: T,
    pub key: Option<K>,
    cached: Option<VertexSet>,
}

impl<T: Real, K> Incumbent<T, K> {
    pub fn new() -> Self {
        Self { value: T::infinity(), key: None, cached: None }
    }

    pub fn offer(&mut self, value: T, key: K, canonical: impl Fn(&K) -> VertexSet) -> bool {
        if value.is_nan() {
            return false;
        }
        if let Some(current) = &self.key {
            if value > self.value {
                return false;
            }
            if value == self.value {
                let cur = self.cached.take().unwrap_or_else(|| canonical(current));
                let cand = canonical(&key);
                if cand.members() < cur.members() {
                    self.key = Some(key);
                    self.cached = Some(cand);
                    return true;
                }
                self.cached = Some(cur);
                return false;
            }
        }
        self.value = value;
        self.key = Some(key);
        self.cached = None;
        true
    }

    pub fn into_subset(self, canonical: impl Fn(&K) -> VertexSet) -> Option<VertexSet> {
        let key = self.key?;
        Some(self.cached.unwrap_or_else(|| canonical(&key)))
    }
}

pub(crate) fn require_vertices<T: Real>(graph: &ProximityGraph<T>) -> Result<(), SolverError> {
    if graph.len() < 2 {
        return Err(SolverError::TooFewVertices { n: graph.len() });
    }
    Ok(())
}

/// The side of a zero-cut split: the connected component of vertex 0.
pub(crate) fn component_split<T: Real>(graph: &ProximityGraph<T>) -> Option<VertexSet> {
    let labels = graph.components();
    if labels.iter().all(|&c| c == 0) {
        return None;
    }
    Some(VertexSet::new((0..graph.len()).filter(|&v| labels[v] == 0).collect()))
}

pub(crate) fn cloud_manifold<T: Real>(graph: &ProximityGraph<T>) -> Option<Manifold> {
    graph.cloud().map(|c| c.manifold())
}
