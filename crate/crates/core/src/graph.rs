//! ε-proximity graphs and the rescaled graph functionals evaluated on them.
//!
//! Weights use the indicator kernel `η(t) = 𝟙{t ≤ 1}` on ambient Euclidean
//! distances, so an edge joins `i ≠ j` exactly when `|x_i − x_j| ≤ ε`.
//! Functionals carry the `1 / (n² ε^{m+1})` rescaling so that they are
//! comparable with their continuum counterparts.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::scalar::{squared_distance, CompensatedSum, Real};
use crate::spatial::SpatialHash;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("epsilon must be a finite non-negative number, got {0}")]
    InvalidEpsilon(f64),
    #[error("vertex {index} out of range for a graph on {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },
    #[error("vertex function has length {got}, graph has {n} vertices")]
    LengthMismatch { got: usize, n: usize },
    #[error("vertex function value at {index} is not finite")]
    NonFinite { index: usize },
    #[error("edge list: {0}")]
    EdgeList(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self(mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn complement(&self, n: usize) -> Self {
        let mask = self.mask(n);
        Self((0..n).filter(|&v| !mask[v]).collect())
    }

    /// The side of the bipartition `{self, complement}` that contains vertex 0.
    pub fn canonical(&self, n: usize) -> Self {
        if n == 0 || self.contains(0) {
            self.clone()
        } else {
            self.complement(n)
        }
    }

    fn check_range(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&index) if index >= n => Err(GraphError::VertexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }
}

/// Balanced-cut objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `GTV(𝟙_A) / min(ν_n(A), 1 − ν_n(A))`.
    CheegerRatio,
    /// `GTV(𝟙_A) / (ν_n(A) ν_n(A^c))`.
    RatioCut,
    /// `GTV(𝟙_A) + γ (ν_n(A)² + ν_n(A^c)²)`.
    Modularity { gamma: f64 },
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::CheegerRatio => "cheeger",
            Objective::RatioCut => "ratio",
            Objective::Modularity { .. } => "modularity",
        }
    }

    /// Whether empty/full subsets make the objective degenerate.
    pub fn is_ratio(&self) -> bool {
        !matches!(self, Objective::Modularity { .. })
    }
}

/// Objective value with a flag for zero ratio denominators (value is then `+∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue<T> {
    pub value: T,
    pub degenerate: bool,
}

/// `GTV(𝟙_A)`, the balance term and the raw cut of a vertex subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutBalance<T> {
    pub gtv: T,
    pub balance: T,
    pub cut: u64,
}

/// Graph metadata persisted next to an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub n: usize,
    pub epsilon: f64,
    pub m: usize,
    pub cloud_ref: Option<String>,
}

/// ε-graph in compressed adjacency form with ascending neighbor lists.
#[derive(Debug, Clone)]
pub struct ProximityGraph<T> {
    n: usize,
    epsilon: T,
    m: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    cloud: Option<Arc<PointCloud<T>>>,
}

impl<T: Real> ProximityGraph<T> {
    /// Connect every pair of distinct points at ambient distance at most `epsilon`.
    pub fn build(cloud: impl Into<Arc<PointCloud<T>>>, epsilon: T) -> Result<Self, GraphError> {
        let cloud = cloud.into();
        if !epsilon.is_finite() || epsilon < T::zero() {
            return Err(GraphError::InvalidEpsilon(epsilon.to_f64().unwrap_or(f64::NAN)));
        }
        let n = cloud.len();
        let d = cloud.dim();
        let m = cloud.manifold().intrinsic_dim();
        let lists: Vec<Vec<u32>> = if epsilon == T::zero() || n < 2 {
            vec![Vec::new(); n]
        } else {
            let hash = SpatialHash::build(cloud.coords(), d, epsilon);
            let eps2 = epsilon * epsilon;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let x = cloud.point(i);
                    let mut nb = Vec::new();
                    hash.for_each_candidate(x, epsilon, |j| {
                        if j as usize != i && squared_distance(x, cloud.point(j as usize)) <= eps2 {
                            nb.push(j);
                        }
                    });
                    nb.sort_unstable();
                    nb
                })
                .collect()
        };
        let mut graph = Self::from_lists(n, epsilon, m, lists);
        graph.cloud = Some(cloud);
        Ok(graph)
    }

    /// Graph from an explicit undirected edge list (no geometry attached).
    pub fn from_edges(n: usize, epsilon: T, m: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut lists = vec![Vec::new(); n];
        for &(i, j) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { index: v, n });
                }
            }
            if i == j {
                continue;
            }
            lists[i].push(j as u32);
            lists[j].push(i as u32);
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self::from_lists(n, epsilon, m, lists))
    }

    fn from_lists(n: usize, epsilon: T, m: usize, lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Self {
            n,
            epsilon,
            m,
            offsets,
            targets,
            cloud: None,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.m
    }

    pub fn cloud(&self) -> Option<&Arc<PointCloud<T>>> {
        self.cloud.as_ref()
    }

    pub fn with_cloud(mut self, cloud: Arc<PointCloud<T>>) -> Self {
        self.cloud = Some(cloud);
        self
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// The rescaling factor `1 / (n² ε^{m+1})`.
    pub fn functional_scale(&self) -> T {
        let n = T::from_count(self.n);
        T::one() / (n * n * self.epsilon.powi(self.m as i32 + 1))
    }

    /// Graph total variation `(1/(n² ε^{m+1})) Σ_i Σ_j w_ij |u_i − u_j|`.
    pub fn gtv(&self, u: &[T]) -> Result<T, GraphError> {
        if u.len() != self.n {
            return Err(GraphError::LengthMismatch { got: u.len(), n: self.n });
        }
        if let Some(index) = u.iter().position(|v| !v.is_finite()) {
            return Err(GraphError::NonFinite { index });
        }
        let mut acc = CompensatedSum::new();
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                acc.add((u[i] - u[j as usize]).abs());
            }
        }
        Ok(acc.value() * self.functional_scale())
    }

    /// Number of edges with exactly one endpoint in the subset described by `mask`.
    pub fn cut_mask(&self, mask: &[bool]) -> u64 {
        let mut cut = 0u64;
        for i in 0..self.n {
            if mask[i] {
                cut += self.neighbors(i).iter().filter(|&&j| !mask[j as usize]).count() as u64;
            }
        }
        cut
    }

    pub fn cut(&self, subset: &VertexSet) -> Result<u64, GraphError> {
        subset.check_range(self.n)?;
        Ok(self.cut_mask(&subset.mask(self.n)))
    }

    /// `GTV(𝟙_subset)` (through `2 Cut / (n² ε^{m+1})`) and `min(|A|/n, 1 − |A|/n)`.
    pub fn cut_and_balance(&self, subset: &VertexSet) -> Result<CutBalance<T>, GraphError> {
        let cut = self.cut(subset)?;
        Ok(CutBalance {
            gtv: self.indicator_gtv(cut),
            balance: self.balance(subset.len()),
            cut,
        })
    }

    pub fn indicator_gtv(&self, cut: u64) -> T {
        T::lit(2.0) * T::lit(cut as f64) * self.functional_scale()
    }

    pub fn balance(&self, k: usize) -> T {
        if self.n == 0 {
            return T::zero();
        }
        T::from_count(k.min(self.n - k)) / T::from_count(self.n)
    }

    pub fn objective(&self, subset: &VertexSet, kind: Objective) -> Result<ObjectiveValue<T>, GraphError> {
        let cut = self.cut(subset)?;
        Ok(self.objective_from_counts(cut, subset.len(), kind))
    }

    /// Objective of a subset with `k` vertices and raw cut `cut`.
    ///
    /// The integer ratio is divided first so that bipartitions with equal
    /// rational objective compare equal bit for bit.
    pub fn objective_from_counts(&self, cut: u64, k: usize, kind: Objective) -> ObjectiveValue<T> {
        let n = self.n;
        let cut_t = T::lit(cut as f64);
        let eps_pow = self.epsilon.powi(self.m as i32 + 1);
        match kind {
            Objective::CheegerRatio => {
                let small = k.min(n.saturating_sub(k));
                if small == 0 {
                    return ObjectiveValue { value: T::infinity(), degenerate: true };
                }
                let ratio = cut_t / T::from_count(small);
                ObjectiveValue {
                    value: ratio * (T::lit(2.0) / (T::from_count(n) * eps_pow)),
                    degenerate: false,
                }
            }
            Objective::RatioCut => {
                if k == 0 || k >= n {
                    return ObjectiveValue { value: T::infinity(), degenerate: true };
                }
                let ratio = cut_t / (T::from_count(k) * T::from_count(n - k));
                ObjectiveValue {
                    value: ratio * (T::lit(2.0) / eps_pow),
                    degenerate: false,
                }
            }
            Objective::Modularity { gamma } => {
                let p = T::from_count(k) / T::from_count(n);
                let q = T::from_count(n - k) / T::from_count(n);
                ObjectiveValue {
                    value: self.indicator_gtv(cut) + T::lit(gamma) * (p * p + q * q),
                    degenerate: false,
                }
            }
        }
    }

    /// Connected component label of every vertex (labels ordered by smallest member).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    let w = w as usize;
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    pub fn meta(&self, cloud_ref: Option<String>) -> GraphMeta {
        GraphMeta {
            n: self.n,
            epsilon: self.epsilon.as_f64(),
            m: self.m,
            cloud_ref,
        }
    }

    /// Write the `i,j` edge list (`i < j`) and its JSON sidecar.
    pub fn write_edge_list(&self, path: &Path, cloud_ref: Option<String>) -> Result<(), GraphError> {
        let io = |source| GraphError::Io { path: path.to_path_buf(), source };
        let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
        writeln!(w, "i,j").map_err(io)?;
        for (i, j) in self.edges() {
            writeln!(w, "{i},{j}").map_err(io)?;
        }
        w.flush().map_err(io)?;
        let side = path.with_extension("json");
        let json = serde_json::to_string_pretty(&self.meta(cloud_ref)).expect("metadata serializes");
        fs::write(&side, json).map_err(|source| GraphError::Io { path: side, source })
    }

    /// Read an edge list written by [`ProximityGraph::write_edge_list`].
    pub fn read_edge_list(path: &Path) -> Result<(Self, GraphMeta), GraphError> {
        let side = path.with_extension("json");
        let text = fs::read_to_string(&side).map_err(|source| GraphError::Io { path: side.clone(), source })?;
        let meta: GraphMeta = serde_json::from_str(&text).map_err(|e| GraphError::EdgeList(format!("{}: {e}", side.display())))?;
        let file = fs::File::open(path).map_err(|source| GraphError::Io { path: path.to_path_buf(), source })?;
        let mut edges = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| GraphError::Io { path: path.to_path_buf(), source })?;
            if lineno == 0 {
                if line.trim() != "i,j" {
                    return Err(GraphError::EdgeList(format!("{}:1: expected header `i,j`", path.display())));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parsed = line
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)));
            match parsed {
                Some(e) => edges.push(e),
                None => {
                    return Err(GraphError::EdgeList(format!("{}:{}: malformed row `{line}`", path.display(), lineno + 1)))
                }
            }
        }
        let g = Self::from_edges(meta.n, T::lit(meta.epsilon), meta.m, &edges)?;
        Ok((g, meta))
    }
}
