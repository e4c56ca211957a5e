use serde::Serialize;

use crate::manifold::{continuum_cheeger, Manifold};
use crate::nonlocal::{ContinuumFunction, QuadratureGrid};

use super::fraenkel::fraenkel_asymmetry;
use super::rate::least_squares;

/// Periodic piecewise-linear graph `g` on `[0, 1)` with zero mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryGraph {
    /// Knots `(v_k, g_k)` with strictly increasing `v_k ∈ [0, 1)`.
    pub knots: Vec<(f64, f64)>,
}

impl BoundaryGraph {
    /// Zero-mean graph through the given knot heights, rescaled to `∫|g| = l1`.
    pub fn with_l1_size(knots: Vec<(f64, f64)>, l1: f64) -> Self {
        let mut g = Self { knots };
        let mean = g.integral(|y| y);
        for k in &mut g.knots {
            k.1 -= mean;
        }
        let size = g.l1_size();
        for k in &mut g.knots {
            k.1 *= l1 / size;
        }
        g
    }

    /// Symmetric tent: up then down once per `1/teeth`.
    pub fn tent(teeth: usize, l1: f64) -> Self {
        let knots = (0..2 * teeth).map(|k| (k as f64 / (2 * teeth) as f64, if k % 2 == 0 { 0.0 } else { 1.0 })).collect();
        Self::with_l1_size(knots, l1)
    }

    fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let k = self.knots.len();
        (0..k).map(move |i| {
            let a = self.knots[i];
            let mut b = self.knots[(i + 1) % k];
            if i + 1 == k {
                b.0 += 1.0;
            }
            (a, b)
        })
    }

    /// `∫ φ(g)` for `φ` affine on each sign-constant piece, done exactly per segment.
    fn integral(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.segments()
            .map(|((x0, y0), (x1, y1))| {
                if y0 * y1 < 0.0 {
                    let xc = x0 + (x1 - x0) * y0 / (y0 - y1);
                    0.5 * (phi(y0) + phi(0.0)) * (xc - x0) + 0.5 * (phi(0.0) + phi(y1)) * (x1 - xc)
                } else {
                    0.5 * (phi(y0) + phi(y1)) * (x1 - x0)
                }
            })
            .sum()
    }

    pub fn l1_size(&self) -> f64 {
        self.integral(f64::abs)
    }

    pub fn mean(&self) -> f64 {
        self.integral(|y| y)
    }

    /// Length of the graph over one period.
    pub fn length(&self) -> f64 {
        self.segments().map(|((x0, y0), (x1, y1))| ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()).sum()
    }

    pub fn value(&self, v: f64) -> f64 {
        let v = v.rem_euclid(1.0);
        for ((x0, y0), (x1, y1)) in self.segments() {
            let (lo, hi) = (x0, x1);
            let vv = if v < lo { v + 1.0 } else { v };
            if vv >= lo && vv < hi {
                return y0 + (y1 - y0) * (vv - lo) / (hi - lo);
            }
        }
        self.knots[0].1
    }
}

/// Torus strip `{0 ≤ u < ½ + g(v)}`: the half-torus strip with one boundary
/// line replaced by a graph. Volume ½ because `g` has zero mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedStrip {
    pub graph: BoundaryGraph,
}

impl PerturbedStrip {
    /// Exact perimeter: the straight boundary plus the graph length.
    pub fn perimeter(&self) -> f64 {
        1.0 + self.graph.length()
    }
}

impl ContinuumFunction for PerturbedStrip {
    fn manifold(&self) -> Manifold {
        Manifold::FlatTorus2
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let [u, v] = Manifold::FlatTorus2.intrinsic(x);
        if u < 0.5 + self.graph.value(v) {
            1.0
        } else {
            0.0
        }
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
    fn total_variation(&self) -> Option<f64> {
        Some(self.perimeter())
    }
    fn is_indicator(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub t: f64,
    pub perimeter_excess: f64,
    pub asymmetry: f64,
}

/// Perimeter excess of perturbed strips against their `L¹` size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub teeth: usize,
    pub rows: Vec<StabilityRow>,
    /// Log-log slope of excess against `t`.
    pub slope: f64,
    /// `min excess / asymmetry²`.
    pub fitted_constant: f64,
    pub min_slope: f64,
    pub pass: bool,
}

pub fn stability_check(ts: &[f64], teeth: usize, grid: &QuadratureGrid, min_slope: f64) -> StabilityReport {
    let reference = continuum_cheeger(Manifold::FlatTorus2);
    let rows: Vec<StabilityRow> = ts
        .iter()
        .map(|&t| {
            let set = PerturbedStrip { graph: BoundaryGraph::tent(teeth, t) };
            let perimeter_excess = set.perimeter() - reference.minimizer_perimeter();
            let asymmetry = fraenkel_asymmetry(&set, &reference, grid).asymmetry;
            StabilityRow { t, perimeter_excess, asymmetry }
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.perimeter_excess.ln()).collect();
    let slope = least_squares(&x, &y).0;
    let fitted_constant = rows
        .iter()
        .filter(|r| r.asymmetry > 0.0)
        .map(|r| r.perimeter_excess / (r.asymmetry * r.asymmetry))
        .fold(f64::INFINITY, f64::min);
    StabilityReport { teeth, rows, slope, fitted_constant, min_slope, pass: slope >= min_slope && fitted_constant > 0.0 }
}
