use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::manifold::{continuum_cheeger, Manifold};
use crate::scalar::compensated_sum;

use super::function::ContinuumFunction;
use super::grid::QuadratureGrid;
use super::kernel::{smooth, SmoothingKernel};
use super::tv::{cheeger_functional_form, crossing_mass, surface_tension, tv_nonlocal};
use super::NonlocalError;

/// Constant used by every inequality check.
pub const CHECK_CONSTANT: f64 = 10.0;

/// Below this `TV_h(f)` counts as zero and ratios are reported as degenerate.
const DEGENERATE_TV: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BiasRow {
    pub h: f64,
    pub grid_resolution: usize,
    pub tv_h: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `TV_h(f) / (σ_η TV(f))` against `1 + C h²`.
#[derive(Debug, Clone, Serialize)]
pub struct BiasReport {
    pub manifold: Manifold,
    pub sigma: f64,
    pub total_variation: f64,
    pub constant: f64,
    pub rows: Vec<BiasRow>,
    /// Least-squares `c` in `ratio − 1 ≈ c h²`.
    pub fitted_constant: f64,
    pub pass: bool,
}

/// Grid resolution policy shared by the checks: spacing at most `scale / nodes_per_scale`.
fn grid_for(manifold: Manifold, scale: f64, nodes_per_scale: f64) -> QuadratureGrid {
    QuadratureGrid::with_spacing(manifold, scale / nodes_per_scale.max(4.0))
}

pub fn check_bias<F: ContinuumFunction + ?Sized>(
    f: &F,
    hs: &[f64],
    nodes_per_h: f64,
) -> Result<BiasReport, NonlocalError> {
    let manifold = f.manifold();
    let sigma = surface_tension(manifold.intrinsic_dim())?;
    let total_variation = f.total_variation().ok_or(NonlocalError::MissingTotalVariation)?;
    let mut rows = Vec::new();
    for &h in hs {
        let grid = grid_for(manifold, h, nodes_per_h);
        let tv_h = tv_nonlocal(f, h, &grid)?;
        let reference = sigma * total_variation;
        let ratio = if reference > 0.0 { tv_h / reference } else { f64::NAN };
        let bound = 1.0 + CHECK_CONSTANT * h * h;
        let pass = if reference > 0.0 { ratio <= bound } else { tv_h <= DEGENERATE_TV };
        rows.push(BiasRow { h, grid_resolution: grid.resolution(), tv_h, ratio, bound, pass });
    }
    let (num, den) = rows
        .iter()
        .filter(|r| r.ratio.is_finite())
        .fold((0.0, 0.0), |(n, d), r| (n + (r.ratio - 1.0) * r.h * r.h, d + r.h.powi(4)));
    let fitted_constant = if den > 0.0 { num / den } else { 0.0 };
    let pass = rows.iter().all(|r| r.pass);
    Ok(BiasReport { manifold, sigma, total_variation, constant: CHECK_CONSTANT, rows, fitted_constant, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityRow {
    pub a: f64,
    pub tv_a: f64,
    /// `TV_a / TV_h`; absent when `TV_h` vanishes.
    pub ratio: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityRow {
    pub multiple: usize,
    pub g_multiple: f64,
    pub g_h: f64,
    /// `g_A(N h) / (N g_A(h))`, at most 1 up to quadrature error.
    pub ratio: f64,
}

/// `TV_a(f) / TV_h(f)` for `a ≥ h`, flagged above `C`, plus the subadditivity
/// of the crossing mass `g_A` at integer multiples when `f` is an indicator.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub manifold: Manifold,
    pub h: f64,
    pub tv_h: f64,
    pub constant: f64,
    pub degenerate: bool,
    pub rows: Vec<MonotonicityRow>,
    pub subadditivity: Vec<SubadditivityRow>,
    /// Largest observed ratio, the empirical constant.
    pub fitted_constant: f64,
    pub pass: bool,
}

pub fn check_monotonicity<F: ContinuumFunction + ?Sized>(
    f: &F,
    h: f64,
    a_list: &[f64],
    nodes_per_h: f64,
) -> Result<MonotonicityReport, NonlocalError> {
    let manifold = f.manifold();
    let half = manifold.h_max() / 2.0;
    if let Some(&a) = a_list.iter().find(|&&a| a < h || a > half) {
        return Err(NonlocalError::InvalidParameter { name: "a", value: a });
    }
    if h > half {
        return Err(NonlocalError::InvalidParameter { name: "h", value: h });
    }
    let grid = grid_for(manifold, h, nodes_per_h);
    let tv_h = tv_nonlocal(f, h, &grid)?;
    let degenerate = tv_h <= DEGENERATE_TV;
    let mut rows = Vec::new();
    for &a in a_list {
        let tv_a = tv_nonlocal(f, a, &grid)?;
        let ratio = (!degenerate).then(|| tv_a / tv_h);
        let flagged = ratio.is_some_and(|r| r > CHECK_CONSTANT);
        rows.push(MonotonicityRow { a, tv_a, ratio, flagged });
    }
    let mut subadditivity = Vec::new();
    if f.is_indicator() && !degenerate {
        let g_h = crossing_mass(f, h, &grid)?;
        for &a in a_list {
            let multiple = (a / h).round();
            if multiple >= 2.0 && (a / h - multiple).abs() < 1e-9 {
                let g_multiple = crossing_mass(f, a, &grid)?;
                let ratio = g_multiple / (multiple * g_h);
                subadditivity.push(SubadditivityRow { multiple: multiple as usize, g_multiple, g_h, ratio });
            }
        }
    }
    let fitted_constant = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| !r.flagged);
    Ok(MonotonicityReport {
        manifold,
        h,
        tv_h,
        constant: CHECK_CONSTANT,
        degenerate,
        rows,
        subadditivity,
        fitted_constant,
        pass,
    })
}

/// Smoothing chain: `σ_η TV(Λ_a f)` against the affine bound
/// `(1 + C(h² + a)) TV_h(f) + C(h/a² + a)‖f‖_∞`, the deviation
/// `‖Λ_a f − f‖_{L¹} / (a TV_h(f))` and the sup of `|∇Λ_a f|` against `C ‖f‖_∞ / a`.
/// The left side is evaluated at bandwidth `h` itself rather than a shrunk
/// one. Gradients of `Λ_a f` are exact derivatives of the kernel sum.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothingChainReport {
    pub manifold: Manifold,
    pub h: f64,
    pub a: f64,
    pub constant: f64,
    pub tv_h: f64,
    pub sigma_tv_smoothed: f64,
    pub ratio: Option<f64>,
    pub bound: f64,
    pub residual: f64,
    pub l1_deviation: f64,
    pub l1_ratio: Option<f64>,
    pub max_gradient: f64,
    pub gradient_bound: f64,
    pub range_preserved: bool,
    pub statement_level: bool,
    pub pass: bool,
}

pub fn check_smoothing_chain<F: ContinuumFunction + ?Sized>(
    f: &F,
    h: f64,
    a: f64,
    nodes_per_h: f64,
) -> Result<SmoothingChainReport, NonlocalError> {
    let manifold = f.manifold();
    if !(h > 0.0 && h <= a) {
        return Err(NonlocalError::InvalidParameter { name: "h", value: h });
    }
    if a > manifold.h_max() / 2.0 {
        return Err(NonlocalError::InvalidParameter { name: "a", value: a });
    }
    let sigma = surface_tension(manifold.intrinsic_dim())?;
    let sup = f.sup_bound().unwrap_or(1.0);
    let grid = Arc::new(grid_for(manifold, h, nodes_per_h));
    let tv_h = tv_nonlocal(f, h, &grid)?;
    let kernel = SmoothingKernel::for_manifold(manifold, a)?;
    let smoothed = smooth(f, kernel, grid.clone())?;

    let per_node: Vec<(f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let (v, g, _) = smoothed.evaluate(x);
            (v, (g[0] * g[0] + g[1] * g[1]).sqrt(), f.eval(x))
        })
        .collect();
    let w = grid.weights();
    let sigma_tv_smoothed = sigma * compensated_sum(per_node.iter().zip(w).map(|(p, w)| w * p.1));
    let l1_deviation = compensated_sum(per_node.iter().zip(w).map(|(p, w)| w * (p.0 - p.2).abs()));
    let max_gradient = per_node.iter().map(|p| p.1).fold(0.0, f64::max);
    let range = |k: fn(&(f64, f64, f64)) -> f64| {
        per_node.iter().map(k).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)))
    };
    let ((lo, hi), (f_lo, f_hi)) = (range(|p| p.0), range(|p| p.2));
    let c = CHECK_CONSTANT;
    let bound = (1.0 + c * (h * h + a)) * tv_h + c * (h / (a * a) + a) * sup;
    let residual = bound - sigma_tv_smoothed;
    let degenerate = tv_h <= DEGENERATE_TV;
    let ratio = (!degenerate).then(|| sigma_tv_smoothed / tv_h);
    let l1_ratio = (!degenerate).then(|| l1_deviation / (a * tv_h));
    let gradient_bound = c * sup / a;
    let range_preserved = lo >= f_lo && hi <= f_hi;
    let pass = residual >= 0.0
        && l1_ratio.map_or(l1_deviation <= 1e-12, |r| r <= c)
        && max_gradient <= gradient_bound
        && range_preserved;
    Ok(SmoothingChainReport {
        manifold,
        h,
        a,
        constant: c,
        tv_h,
        sigma_tv_smoothed,
        ratio,
        bound,
        residual,
        l1_deviation,
        l1_ratio,
        max_gradient,
        gradient_bound,
        range_preserved,
        statement_level: true,
        pass,
    })
}

/// `TV(f) / ‖f − m₁(f)‖_{L¹}` against the continuum Cheeger constant.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionalFormReport {
    pub manifold: Manifold,
    pub value: f64,
    pub total_variation: f64,
    pub median: f64,
    pub deviation: f64,
    pub cheeger_constant: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_functional_form<F: ContinuumFunction + ?Sized>(
    f: &F,
    grid: &QuadratureGrid,
    tolerance: f64,
) -> Result<FunctionalFormReport, NonlocalError> {
    let form = cheeger_functional_form(f, grid)?;
    let cheeger_constant = continuum_cheeger(grid.manifold()).constant;
    Ok(FunctionalFormReport {
        manifold: grid.manifold(),
        value: form.value,
        total_variation: form.total_variation,
        median: form.median,
        deviation: form.deviation,
        cheeger_constant,
        tolerance,
        pass: form.value >= cheeger_constant - tolerance,
    })
}
