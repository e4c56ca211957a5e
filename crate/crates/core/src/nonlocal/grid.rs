use std::f64::consts::PI;

use rayon::prelude::*;

use crate::manifold::Manifold;
use crate::scalar::CompensatedSum;

use super::NonlocalError;

/// Chunk length of the parallel quadrature reductions. Fixed so that sums do
/// not depend on the number of worker threads.
const CHUNK: usize = 512;

/// Deterministic product-type quadrature over a reference manifold.
///
/// * circle: `N` cell midpoints in arclength,
/// * torus: `N × N` cell centers,
/// * sphere: `N` equal-colatitude bands (equator on a band edge for even `N`),
///   each split into longitude cells of roughly the band height, with
///   alternate bands staggered by half a cell. Band weights are exact areas.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    manifold: Manifold,
    resolution: usize,
    spacing: f64,
    intrinsic: Vec<[f64; 2]>,
    coords: Vec<f64>,
    weights: Vec<f64>,
    bands: Vec<Band>,
}

/// One sphere band: nodes `start..start + cells` at colatitude `colat`,
/// longitudes `2π (j + shift) / cells`.
#[derive(Debug, Clone, Copy)]
struct Band {
    start: usize,
    cells: usize,
    colat: f64,
    shift: f64,
}

impl QuadratureGrid {
    pub fn new(manifold: Manifold, resolution: usize) -> Self {
        assert!(resolution >= 2, "quadrature resolution must be at least 2");
        let mut intrinsic = Vec::new();
        let mut weights = Vec::new();
        let mut bands = Vec::new();
        let n = resolution;
        let spacing = match manifold {
            Manifold::Circle => {
                for i in 0..n {
                    intrinsic.push([(i as f64 + 0.5) / n as f64, 0.0]);
                    weights.push(1.0 / n as f64);
                }
                1.0 / n as f64
            }
            Manifold::FlatTorus2 => {
                let w = 1.0 / (n * n) as f64;
                for i in 0..n {
                    for j in 0..n {
                        intrinsic.push([(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64]);
                        weights.push(w);
                    }
                }
                1.0 / n as f64
            }
            Manifold::Sphere2 => {
                let r: f64 = manifold.scale();
                let dtheta = PI / n as f64;
                for k in 0..n {
                    let (lo, hi) = (k as f64 * dtheta, (k + 1) as f64 * dtheta);
                    let colat = 0.5 * (lo + hi);
                    let area = 2.0 * PI * r * r * (lo.cos() - hi.cos());
                    let cells = ((2.0 * PI * colat.sin() / dtheta).round() as usize).max(3);
                    let shift = if k % 2 == 1 { 0.5 } else { 0.0 };
                    bands.push(Band { start: intrinsic.len(), cells, colat, shift });
                    for j in 0..cells {
                        intrinsic.push([colat, 2.0 * PI * (j as f64 + shift) / cells as f64]);
                        weights.push(area / cells as f64);
                    }
                }
                r * dtheta
            }
        };
        let d = manifold.ambient_dim();
        let mut coords = vec![0.0; d * intrinsic.len()];
        for (p, out) in intrinsic.iter().zip(coords.chunks_exact_mut(d)) {
            manifold.embed(p, out);
        }
        Self { manifold, resolution, spacing, intrinsic, coords, weights, bands }
    }

    /// Coarsest grid whose spacing does not exceed `max_spacing`. Circle and
    /// torus resolutions are even so that half-period boundaries fall on cell edges.
    pub fn with_spacing(manifold: Manifold, max_spacing: f64) -> Self {
        assert!(max_spacing > 0.0, "spacing must be positive");
        let period = match manifold {
            Manifold::Circle | Manifold::FlatTorus2 => 1.0,
            Manifold::Sphere2 => PI * manifold.scale::<f64>(),
        };
        let mut n = ((period / max_spacing) * (1.0 - 1e-12)).ceil().max(2.0) as usize;
        if n % 2 == 1 {
            n += 1;
        }
        Self::new(manifold, n)
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Geodesic node spacing (sphere: band height).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.manifold.ambient_dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn intrinsic(&self, i: usize) -> [f64; 2] {
        self.intrinsic[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_i w_i g(i)`, reduced in a fixed order.
    pub fn integrate(&self, g: impl Fn(usize) -> f64 + Sync) -> f64 {
        chunked_sum(self.len(), |i| self.weights[i] * g(i))
    }

    /// Visit a superset of the nodes within geodesic distance `radius` of `x`,
    /// each once, by enumerating index windows of the product structure.
    pub fn for_each_near(&self, x: &[f64], radius: f64, mut visit: impl FnMut(usize)) {
        let n = self.resolution;
        let window = |c: f64, count: usize, shift: f64, half: f64, visit: &mut dyn FnMut(usize)| {
            // cells j with (j + shift)/count within half of c, wrapped
            if 2.0 * half * count as f64 + 2.0 >= count as f64 {
                (0..count).for_each(visit);
                return;
            }
            let lo = ((c - half) * count as f64 - shift).floor() as i64;
            let hi = ((c + half) * count as f64 - shift).ceil() as i64;
            for j in lo..=hi {
                visit(j.rem_euclid(count as i64) as usize);
            }
        };
        match self.manifold {
            Manifold::Circle => {
                let u = self.manifold.intrinsic(x)[0];
                window(u, n, 0.5, radius, &mut visit);
            }
            Manifold::FlatTorus2 => {
                let [u, v] = self.manifold.intrinsic(x);
                window(u, n, 0.5, radius, &mut |i| window(v, n, 0.5, radius, &mut |j| visit(i * n + j)));
            }
            Manifold::Sphere2 => {
                let r: f64 = self.manifold.scale();
                let [colat, lon] = self.manifold.intrinsic(x);
                let alpha = radius / r * (1.0 + 1e-9) + 1e-12;
                let dtheta = PI / n as f64;
                let first = ((colat - alpha) / dtheta - 0.5).floor().max(0.0) as usize;
                let last = (((colat + alpha) / dtheta - 0.5).ceil().max(0.0) as usize).min(n - 1);
                for band in &self.bands[first..=last] {
                    let (s0, c0) = colat.sin_cos();
                    let (s1, c1) = band.colat.sin_cos();
                    let denom = s0 * s1;
                    let cos_dl = if denom > 1e-15 { (alpha.cos() - c0 * c1) / denom } else { -2.0 };
                    if cos_dl > 1.0 + 1e-12 {
                        continue;
                    }
                    let half = if cos_dl <= -1.0 { 0.5 } else { cos_dl.min(1.0).acos() / (2.0 * PI) };
                    let c = lon / (2.0 * PI);
                    window(c, band.cells, band.shift, half, &mut |j| visit(band.start + j));
                }
            }
        }
    }

    pub(crate) fn require_spacing(&self, bound: f64) -> Result<(), NonlocalError> {
        if self.spacing > bound * (1.0 + 1e-12) {
            return Err(NonlocalError::ResolutionTooCoarse { spacing: self.spacing, required: bound });
        }
        Ok(())
    }
}

/// Compensated sum of `term(0..len)` over fixed chunks, evaluated in parallel.
pub(crate) fn chunked_sum(len: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partials: Vec<CompensatedSum<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&term).collect())
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// Geodesic polar rule over tangent balls, with precomputed offsets.
///
/// Radii are midpoints of `rings` equal shells, each shell split into angular
/// cells of about the shell width. Weights include the Riemannian polar
/// Jacobian unless the rule is built with `flat = true`, which integrates
/// over the tangent ball itself.
#[derive(Debug, Clone)]
pub(crate) struct BallRule {
    manifold: Manifold,
    // (cos t, sin t) of the rotation per coordinate for circle/torus; sphere:
    // (cos(ρ/r), r sin(ρ/r) cos α, r sin(ρ/r) sin α)
    offsets: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

impl BallRule {
    /// Shells of width at most `step`; in two dimensions never finer than `radius/16`.
    pub fn new(manifold: Manifold, radius: f64, step: f64, flat: bool) -> Self {
        let step = if manifold.intrinsic_dim() == 2 { step.max(radius / 16.0) } else { step };
        let rings = ((radius / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dr = radius / rings as f64;
        let r: f64 = manifold.scale();
        let tau = 2.0 * PI;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for j in 0..rings {
            let rho = (j as f64 + 0.5) * dr;
            let jac = if flat { 1.0 } else { manifold.polar_jacobian(rho) };
            match manifold {
                Manifold::Circle => {
                    for s in [-1.0, 1.0] {
                        let t = tau * s * rho;
                        offsets.push([t.cos(), t.sin(), 1.0, 0.0]);
                        weights.push(dr);
                    }
                }
                Manifold::FlatTorus2 | Manifold::Sphere2 => {
                    let cells = ((tau * rho / dr).ceil() as usize).max(6);
                    let w = dr * rho * jac * tau / cells as f64;
                    for l in 0..cells {
                        let alpha = tau * (l as f64 + 0.5) / cells as f64;
                        let (wu, wv) = (rho * alpha.cos(), rho * alpha.sin());
                        if manifold == Manifold::FlatTorus2 {
                            let (a, b) = (tau * wu, tau * wv);
                            offsets.push([a.cos(), a.sin(), b.cos(), b.sin()]);
                        } else {
                            let t = rho / r;
                            offsets.push([t.cos(), r * t.sin() * alpha.cos(), r * t.sin() * alpha.sin(), 0.0]);
                        }
                        weights.push(w);
                    }
                }
            }
        }
        Self { manifold, offsets, weights }
    }

    /// Call `visit(y, weight)` for every rule node around `x`.
    pub fn for_each(&self, x: &[f64], mut visit: impl FnMut(&[f64], f64)) {
        let mut y = [0.0; 4];
        match self.manifold {
            Manifold::Circle | Manifold::FlatTorus2 => {
                let torus = self.manifold == Manifold::FlatTorus2;
                for (o, &w) in self.offsets.iter().zip(&self.weights) {
                    y[0] = o[0] * x[0] - o[1] * x[1];
                    y[1] = o[1] * x[0] + o[0] * x[1];
                    if torus {
                        y[2] = o[2] * x[2] - o[3] * x[3];
                        y[3] = o[3] * x[2] + o[2] * x[3];
                    }
                    visit(&y[..self.manifold.ambient_dim()], w);
                }
            }
            Manifold::Sphere2 => {
                let [e1, e2] = self.manifold.tangent_frame(x);
                for (o, &w) in self.offsets.iter().zip(&self.weights) {
                    for k in 0..3 {
                        y[k] = o[0] * x[k] + o[1] * e1[k] + o[2] * e2[k];
                    }
                    visit(&y[..3], w);
                }
            }
        }
    }
}
