use std::f64::consts::PI;
use std::sync::Arc;

use crate::manifold::Manifold;

use super::function::ContinuumFunction;
use super::grid::QuadratureGrid;
use super::NonlocalError;

/// Normalized bump `φ(t) = c_m exp(−1/(1 − t²))` on `[0, 1)`, scaled to bandwidth `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    dim: usize,
    a: f64,
    normalization: f64,
}

impl SmoothingKernel {
    pub fn new(dim: usize, a: f64) -> Result<Self, NonlocalError> {
        if !(1..=3).contains(&dim) {
            return Err(NonlocalError::UnsupportedDimension { m: dim });
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(NonlocalError::InvalidParameter { name: "a", value: a });
        }
        let sphere = match dim {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        let radial = simpson(|t| bump(t) * t.powi(dim as i32 - 1), 0.0, 1.0, 20_000);
        Ok(Self { dim, a, normalization: 1.0 / (sphere * radial) })
    }

    pub fn for_manifold(manifold: Manifold, a: f64) -> Result<Self, NonlocalError> {
        Self::new(manifold.intrinsic_dim(), a)
    }

    pub fn bandwidth(&self) -> f64 {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unit-mass profile `φ(t)`.
    pub fn profile(&self, t: f64) -> f64 {
        self.normalization * bump(t)
    }

    /// `φ_a(d) = a^{−m} φ(d / a)`.
    pub fn scaled(&self, d: f64) -> f64 {
        self.profile(d / self.a) / self.a.powi(self.dim as i32)
    }

    /// `d/dd φ_a(d)`.
    pub fn scaled_derivative(&self, d: f64) -> f64 {
        let t = d / self.a;
        if t >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - t * t;
        -self.profile(t) * 2.0 * t / (q * q) / self.a.powi(self.dim as i32 + 1)
    }

    /// `∫_{R^m} φ(|x|) dx` by an independent radial rule; 1 up to quadrature error.
    pub fn mass(&self) -> f64 {
        let sphere = match self.dim {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        sphere * gauss_legendre_composite(|t| self.profile(t) * t.powi(self.dim as i32 - 1), 400)
    }
}

fn bump(t: f64) -> f64 {
    let t = t.abs();
    if t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

fn gauss_legendre_composite(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let h = 1.0 / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = (p as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// `Λ_a f`: kernel average over the nodes of a quadrature grid, normalized by
/// the same sum of kernel weights so constants are reproduced exactly.
pub struct Smoothed {
    manifold: Manifold,
    kernel: SmoothingKernel,
    grid: Arc<QuadratureGrid>,
    values: Vec<f64>,
    sup: Option<f64>,
}

/// Build `Λ_a f` on `grid`; needs grid spacing at most `a/4` and `a ≤ h_M`.
pub fn smooth<F: ContinuumFunction + ?Sized>(
    f: &F,
    kernel: SmoothingKernel,
    grid: Arc<QuadratureGrid>,
) -> Result<Smoothed, NonlocalError> {
    super::require_same_manifold(grid.manifold(), f.manifold())?;
    let values: Vec<f64> = (0..grid.len()).map(|i| f.eval(grid.node(i))).collect();
    smooth_node_values(values, f.sup_bound(), kernel, grid)
}

/// `Λ_a` of the piecewise-constant function taking `values[i]` on the cell of grid node `i`.
pub fn smooth_node_values(
    values: Vec<f64>,
    sup: Option<f64>,
    kernel: SmoothingKernel,
    grid: Arc<QuadratureGrid>,
) -> Result<Smoothed, NonlocalError> {
    let manifold = grid.manifold();
    assert_eq!(values.len(), grid.len(), "one value per grid node");
    let a = kernel.bandwidth();
    if a > manifold.h_max() {
        return Err(NonlocalError::BandwidthTooLarge { value: a, limit: manifold.h_max() });
    }
    grid.require_spacing(a / 4.0)?;
    Ok(Smoothed { manifold, kernel, grid, values, sup })
}

/// Geodesic distance from `x` to grid node `j` and the unit tangent at `x`
/// pointing to it, in frame coordinates.
struct Geometry<'a> {
    manifold: Manifold,
    grid: &'a QuadratureGrid,
    x: &'a [f64],
    intrinsic: [f64; 2],
    frame: [[f64; 4]; 2],
}

impl<'a> Geometry<'a> {
    fn new(manifold: Manifold, grid: &'a QuadratureGrid, x: &'a [f64]) -> Self {
        Self { manifold, grid, x, intrinsic: manifold.intrinsic(x), frame: manifold.tangent_frame(x) }
    }

    fn to(&self, j: usize, limit: f64) -> Option<(f64, [f64; 2])> {
        let wrap = |t: f64| t - t.round();
        match self.manifold {
            Manifold::Circle => {
                let du = wrap(self.grid.intrinsic(j)[0] - self.intrinsic[0]);
                let d = du.abs();
                (d < limit).then(|| (d, [du.signum(), 0.0]))
            }
            Manifold::FlatTorus2 => {
                let p = self.grid.intrinsic(j);
                let (du, dv) = (wrap(p[0] - self.intrinsic[0]), wrap(p[1] - self.intrinsic[1]));
                let d = (du * du + dv * dv).sqrt();
                (d < limit).then(|| if d > 0.0 { (d, [du / d, dv / d]) } else { (0.0, [0.0, 0.0]) })
            }
            Manifold::Sphere2 => {
                let r: f64 = self.manifold.scale();
                let y = self.grid.node(j);
                let chord = crate::scalar::squared_distance(self.x, y).sqrt();
                let angle = 2.0 * (0.5 * chord / r).min(1.0).asin();
                let d = r * angle;
                if d >= limit {
                    return None;
                }
                let c = angle.cos();
                let t = [y[0] - c * self.x[0], y[1] - c * self.x[1], y[2] - c * self.x[2]];
                let norm = crate::scalar::norm(&t);
                if norm == 0.0 {
                    return Some((d, [0.0, 0.0]));
                }
                let dot = |e: &[f64; 4]| (t[0] * e[0] + t[1] * e[1] + t[2] * e[2]) / norm;
                Some((d, [dot(&self.frame[0]), dot(&self.frame[1])]))
            }
        }
    }
}

impl Smoothed {
    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    /// Normalizer `τ_a(x)`: the quadrature mass of `φ_a(d(x, ·))`.
    pub fn normalizer(&self, x: &[f64]) -> f64 {
        self.evaluate(x).2
    }

    /// `(Λ_a f(x), ∇Λ_a f(x), τ_a(x))`. The average is accumulated relative to
    /// the first contributing node and clamped to the contributing range, so
    /// constants come back bit-exact and `[0, 1]` is preserved. The gradient
    /// differentiates the kernel weights in closed form.
    pub fn evaluate(&self, x: &[f64]) -> (f64, [f64; 2], f64) {
        let a = self.kernel.bandwidth();
        let w = self.grid.weights();
        let geo = Geometry::new(self.manifold, &self.grid, x);
        let mut base = f64::NAN;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut num, mut den) = (0.0, 0.0);
        let (mut dnum, mut dden) = ([0.0; 2], [0.0; 2]);
        self.grid.for_each_near(x, a, |j| {
            let Some((d, dir)) = geo.to(j, a) else { return };
            let v = self.values[j];
            if base.is_nan() {
                base = v;
            }
            let k = w[j] * self.kernel.scaled(d);
            let dk = -w[j] * self.kernel.scaled_derivative(d);
            num += k * (v - base);
            den += k;
            for c in 0..2 {
                dnum[c] += dk * dir[c] * (v - base);
                dden[c] += dk * dir[c];
            }
            lo = lo.min(v);
            hi = hi.max(v);
        });
        if den == 0.0 {
            return (f64::NAN, [f64::NAN; 2], 0.0);
        }
        let grad = [0, 1].map(|c| (dnum[c] * den - num * dden[c]) / (den * den));
        ((base + num / den).clamp(lo, hi), grad, den)
    }
}

impl ContinuumFunction for Smoothed {
    fn manifold(&self) -> Manifold {
        self.manifold
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.evaluate(x).0
    }
    fn gradient(&self, x: &[f64]) -> Option<[f64; 2]> {
        Some(self.evaluate(x).1)
    }
    fn sup_bound(&self) -> Option<f64> {
        self.sup
    }
}
