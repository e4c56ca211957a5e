//! Smallest non-trivial eigenpairs of the unnormalized graph Laplacian.
//!
//! Thick-restart Lanczos on `L = D − W` restricted to the orthogonal
//! complement of the constant vector, with two passes of classical
//! Gram–Schmidt against the whole basis at every step.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::graph::ProximityGraph;
use crate::scalar::Real;

use super::SolverError;

/// Relative residual tolerance, measured against the Gershgorin bound `2 · max degree`.
pub const EIGEN_TOLERANCE: f64 = 1e-8;
/// Budget of Laplacian applications.
pub const MAX_MATVECS: usize = 10_000;
const DENSE_LIMIT: usize = 96;

/// Eigenpairs in ascending eigenvalue order, vectors of unit length.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Largest absolute residual `‖L v − λ v‖` among the returned pairs.
    pub residual: f64,
    pub matvecs: usize,
}

/// The `nev` smallest eigenpairs of `L` orthogonal to the constants.
///
/// The graph must be connected so that the constant vector spans the kernel.
/// A single Krylov sequence sees only one vector per eigenspace, so runs are
/// repeated against the pairs found so far until no run lowers the `nev`-th
/// smallest value; this recovers multiple eigenvalues.
pub fn laplacian_eigenpairs<T: Real>(graph: &ProximityGraph<T>, nev: usize, seed: u64) -> Result<EigenPairs, SolverError> {
    let n = graph.len();
    let nev = nev.clamp(1, n.saturating_sub(1).max(1));
    if n <= DENSE_LIMIT {
        return Ok(dense(graph, nev));
    }
    let op = Laplacian::new(graph);
    let scale = (2.0 * graph.max_degree() as f64).max(1.0);
    let tol = EIGEN_TOLERANCE * scale;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut matvecs = 0;
    while found.len() + nev < n - 1 {
        let locked: Vec<Vec<f64>> = found.iter().map(|(_, v)| v.clone()).collect();
        let run = lanczos_run(&op, &locked, nev, tol, &mut rng, MAX_MATVECS - matvecs);
        let (pairs, used) = match run {
            Ok(ok) => ok,
            Err((used, residual)) => {
                return Err(SolverError::EigenNotConverged { iterations: matvecs + used, residual });
            }
        };
        matvecs += used;
        let threshold = if found.len() >= nev { found[nev - 1].0 - tol } else { f64::INFINITY };
        let lowered = pairs.iter().any(|(lam, _)| *lam < threshold);
        found.extend(pairs);
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !lowered || matvecs >= MAX_MATVECS {
            break;
        }
    }
    found.truncate(nev);
    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = found.into_iter().unzip();
    let residual = vectors.iter().zip(&values).map(|(v, &lam)| op.residual(v, lam)).fold(0.0, f64::max);
    if residual > tol {
        return Err(SolverError::EigenNotConverged { iterations: matvecs, residual });
    }
    Ok(EigenPairs { values, vectors, residual, matvecs })
}

type RunOutput = Result<(Vec<(f64, Vec<f64>)>, usize), (usize, f64)>;

/// One thick-restart Lanczos run in the complement of the constants and `locked`.
fn lanczos_run<T: Real>(
    op: &Laplacian<'_, T>,
    locked: &[Vec<f64>],
    nev: usize,
    tol: f64,
    rng: &mut ChaCha20Rng,
    budget: usize,
) -> RunOutput {
    let n = op.graph.len();
    let room = n - 1 - locked.len();
    let nev = nev.min(room);
    let maxdim = (2 * nev + 40).min(room);
    let keep = (nev + 12).min(maxdim / 2).max(nev);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(maxdim + 1);
    let mut first = random_vector(n, rng);
    orthonormalize(&mut first, locked, &basis);
    basis.push(first);

    let mut t = DMatrix::<f64>::zeros(maxdim, maxdim);
    let mut kept = 0;
    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    loop {
        let mut beta = 0.0;
        let mut residual_vec = Vec::new();
        for j in kept..maxdim {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let h = orthogonalize(&mut w, locked, &basis);
            for (i, &hi) in h.iter().enumerate() {
                t[(i, j)] = hi;
                t[(j, i)] = hi;
            }
            beta = dot(&w, &w).sqrt();
            let mut next = std::mem::replace(&mut w, vec![0.0; n]);
            if beta <= 1e-12 * tol / EIGEN_TOLERANCE {
                // invariant subspace: continue with a fresh direction
                beta = 0.0;
                next = random_vector(n, rng);
                orthonormalize(&mut next, locked, &basis);
            } else {
                next.iter_mut().for_each(|x| *x /= beta);
            }
            if j + 1 == maxdim {
                residual_vec = next;
            } else {
                t[(j + 1, j)] = beta;
                t[(j, j + 1)] = beta;
                basis.push(next);
            }
        }

        let eig = SymmetricEigen::new(t.clone());
        let mut idx: Vec<usize> = (0..maxdim).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let ritz_residual = |i: usize| (beta * eig.eigenvectors[(maxdim - 1, idx[i])]).abs();
        let worst = (0..nev).map(ritz_residual).fold(0.0, f64::max);
        if worst <= tol || maxdim == room {
            let pairs = (0..nev)
                .map(|i| (eig.eigenvalues[idx[i]], combine(&basis, &eig.eigenvectors, idx[i])))
                .collect();
            return Ok((pairs, matvecs));
        }
        if matvecs >= budget {
            return Err((matvecs, worst));
        }

        let ritz: Vec<Vec<f64>> = (0..keep).map(|i| combine(&basis, &eig.eigenvectors, idx[i])).collect();
        t.fill(0.0);
        for i in 0..keep {
            t[(i, i)] = eig.eigenvalues[idx[i]];
        }
        basis = ritz;
        basis.push(residual_vec);
        kept = keep;
    }
}

fn dense<T: Real>(graph: &ProximityGraph<T>, nev: usize) -> EigenPairs {
    let n = graph.len();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = graph.degree(i) as f64;
        for &j in graph.neighbors(i) {
            l[(i, j as usize)] = -1.0;
        }
    }
    let eig = SymmetricEigen::new(l);
    let c = 1.0 / (n as f64).sqrt();
    // drop the eigenvector closest to the constants
    let mut idx: Vec<usize> = (0..n).collect();
    let constant = idx
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let ca = eig.eigenvectors.column(a).sum().abs() * c;
            let cb = eig.eigenvectors.column(b).sum().abs() * c;
            ca.total_cmp(&cb).then(b.cmp(&a))
        })
        .expect("n ≥ 1");
    idx.retain(|&i| i != constant);
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let op = Laplacian::new(graph);
    let mut values = Vec::with_capacity(nev);
    let mut vectors = Vec::with_capacity(nev);
    for &i in idx.iter().take(nev) {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        orthonormalize(&mut v, &[], &[]);
        values.push(eig.eigenvalues[i]);
        vectors.push(v);
    }
    let residual = vectors.iter().zip(&values).map(|(v, &lam)| op.residual(v, lam)).fold(0.0, f64::max);
    EigenPairs { values, vectors, residual, matvecs: 0 }
}

struct Laplacian<'a, T> {
    graph: &'a ProximityGraph<T>,
}

impl<'a, T: Real> Laplacian<'a, T> {
    fn new(graph: &'a ProximityGraph<T>) -> Self {
        Self { graph }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, o)| {
            let nb = self.graph.neighbors(i);
            let s: f64 = nb.iter().map(|&j| x[j as usize]).sum();
            *o = nb.len() as f64 * x[i] - s;
        });
    }

    fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let mut out = vec![0.0; v.len()];
        self.apply(v, &mut out);
        out.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }
}

fn random_vector(n: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Two passes of Gram–Schmidt against the constants, `locked` and `basis`;
/// returns the accumulated coefficients along `basis`.
fn orthogonalize(w: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut h = vec![0.0; basis.len()];
    for _ in 0..2 {
        remove_mean(w);
        for b in locked {
            let c = dot(b, w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let coeffs: Vec<f64> = basis.par_iter().map(|b| dot(b, w)).collect();
        for (b, &c) in basis.iter().zip(&coeffs) {
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        h.iter_mut().zip(&coeffs).for_each(|(a, c)| *a += c);
    }
    h
}

fn orthonormalize(w: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) {
    orthogonalize(w, locked, basis);
    let len = dot(w, w).sqrt();
    w.iter_mut().for_each(|x| *x /= len);
}

fn combine(basis: &[Vec<f64>], s: &DMatrix<f64>, col: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut y = vec![0.0; n];
    for (k, b) in basis.iter().enumerate().take(s.nrows()) {
        let c = s[(k, col)];
        y.iter_mut().zip(b).for_each(|(a, x)| *a += c * x);
    }
    let len = dot(&y, &y).sqrt();
    y.iter_mut().for_each(|x| *x /= len);
    y
}
