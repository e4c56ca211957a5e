use std::f64::consts::PI;

use serde::Serialize;

use crate::manifold::{FamilyMember, Manifold};

use super::function::{gradient_norm, ContinuumFunction};
use super::grid::{chunked_sum, BallRule, QuadratureGrid};
use super::{require_same_manifold, NonlocalError};

/// `σ_η = ∫_{B(0,1)} |z_1| dz` for the indicator kernel in dimension `m`.
pub fn surface_tension(m: usize) -> Result<f64, NonlocalError> {
    match m {
        1 => Ok(1.0),
        2 => Ok(4.0 / 3.0),
        3 => Ok(PI / 2.0),
        _ => Err(NonlocalError::UnsupportedDimension { m }),
    }
}

/// Closed-form perimeter of a minimizer-family member.
pub fn perimeter_reference(member: &FamilyMember) -> f64 {
    member.perimeter()
}

fn check_bandwidth(manifold: Manifold, name: &'static str, h: f64) -> Result<(), NonlocalError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(NonlocalError::InvalidParameter { name, value: h });
    }
    if h > manifold.h_max() {
        return Err(NonlocalError::BandwidthTooLarge { value: h, limit: manifold.h_max() });
    }
    Ok(())
}

/// Non-local total variation
/// `TV_h(f) = h^{−(m+1)} ∫∫_{d(x,y) ≤ h} |f(x) − f(y)| dy dx`.
///
/// Outer integral on `grid`, inner integral by a geodesic polar rule with
/// radial step half the grid spacing. Needs grid spacing at most `h/4`.
pub fn tv_nonlocal<F: ContinuumFunction + ?Sized>(f: &F, h: f64, grid: &QuadratureGrid) -> Result<f64, NonlocalError> {
    let m = grid.manifold();
    require_same_manifold(m, f.manifold())?;
    check_bandwidth(m, "h", h)?;
    grid.require_spacing(h / 4.0)?;
    let rule = BallRule::new(m, h, grid.spacing() / 2.0, false);
    let total = grid.integrate(|i| {
        let x = grid.node(i);
        let fx = f.eval(x);
        let mut acc = 0.0;
        rule.for_each(x, |y, w| acc += w * (fx - f.eval(y)).abs());
        acc
    });
    Ok(total / h.powi(m.intrinsic_dim() as i32 + 1))
}

/// `g_A(h) = ∫_A ∫_{|v| ≤ 1} 1_{A^c}(exp_x(h v)) dv dx` for an indicator `f = 1_A`.
pub fn crossing_mass<F: ContinuumFunction + ?Sized>(f: &F, h: f64, grid: &QuadratureGrid) -> Result<f64, NonlocalError> {
    let m = grid.manifold();
    require_same_manifold(m, f.manifold())?;
    check_bandwidth(m, "h", h)?;
    grid.require_spacing(h / 4.0)?;
    let rule = BallRule::new(m, h, grid.spacing() / 2.0, true);
    let total = grid.integrate(|i| {
        let x = grid.node(i);
        let fx = f.eval(x);
        if fx == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        rule.for_each(x, |y, w| acc += w * (1.0 - f.eval(y)));
        fx * acc
    });
    Ok(total / h.powi(m.intrinsic_dim() as i32))
}

/// `∫ |∇f|` on `grid`; finite differences with step `spacing/8` when no closed-form gradient exists.
pub fn tv_local_smooth<F: ContinuumFunction + ?Sized>(f: &F, grid: &QuadratureGrid) -> f64 {
    let step = grid.spacing() / 8.0;
    grid.integrate(|i| gradient_norm(f, grid.node(i), step))
}

/// `‖f − g‖_{L¹}` on `grid`.
pub fn l1_distance<F, G>(f: &F, g: &G, grid: &QuadratureGrid) -> f64
where
    F: ContinuumFunction + ?Sized,
    G: ContinuumFunction + ?Sized,
{
    grid.integrate(|i| (f.eval(grid.node(i)) - g.eval(grid.node(i))).abs())
}

/// Pieces of the ratio `TV(f) / ‖f − m₁(f)‖_{L¹}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalForm {
    pub value: f64,
    pub total_variation: f64,
    pub median: f64,
    pub deviation: f64,
}

/// `TV(f) / ‖f − m₁(f)‖_{L¹}` for `f` with values in `[0, 1]`. The median is
/// found by golden-section search on `c ↦ ‖f − c‖_{L¹}`; `TV(f)` is the
/// closed form when known and [`tv_local_smooth`] otherwise.
pub fn cheeger_functional_form<F: ContinuumFunction + ?Sized>(
    f: &F,
    grid: &QuadratureGrid,
) -> Result<FunctionalForm, NonlocalError> {
    require_same_manifold(grid.manifold(), f.manifold())?;
    let values: Vec<f64> = (0..grid.len()).map(|i| f.eval(grid.node(i))).collect();
    let weights = grid.weights();
    let spread = |c: f64| chunked_sum(values.len(), |i| weights[i] * (values[i] - c).abs());
    let coarse = golden_section(spread, 0.0, 1.0, 1e-10);
    // the minimizer of a piecewise-linear convex spread sits on a node value
    let snapped = values
        .iter()
        .copied()
        .min_by(|a, b| (a - coarse).abs().total_cmp(&(b - coarse).abs()))
        .unwrap_or(coarse)
        .clamp(0.0, 1.0);
    let (median, deviation) = [coarse, snapped]
        .into_iter()
        .map(|c| (c, spread(c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");
    if deviation < 1e-12 {
        return Err(NonlocalError::DegenerateFunction { deviation });
    }
    let total_variation = f.total_variation().unwrap_or_else(|| tv_local_smooth(f, grid));
    Ok(FunctionalForm { value: total_variation / deviation, total_variation, median, deviation })
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::StripAxis;
    use crate::nonlocal::{Constant, FamilyIndicator, FnFunction};

    const HALF_ARC: FamilyMember = FamilyMember::HalfArc { center: 0.25 };

    #[test]
    fn surface_tension_closed_forms() {
        assert_eq!(surface_tension(1).unwrap(), 1.0);
        assert_eq!(surface_tension(2).unwrap(), 4.0 / 3.0);
        assert_eq!(surface_tension(3).unwrap(), PI / 2.0);
        assert!(matches!(surface_tension(4), Err(NonlocalError::UnsupportedDimension { m: 4 })));
    }

    #[test]
    fn constant_has_zero_nonlocal_tv() {
        for m in Manifold::ALL {
            let grid = QuadratureGrid::with_spacing(m, 0.1 / 4.0);
            let c = Constant { manifold: m, value: 3.5 };
            assert_eq!(tv_nonlocal(&c, 0.1, &grid).unwrap(), 0.0);
        }
    }

    #[test]
    fn circle_half_arc_is_two() {
        for h in [0.05, 0.1, 0.2, 0.25] {
            let grid = QuadratureGrid::with_spacing(Manifold::Circle, h / 8.0);
            let tv = tv_nonlocal(&FamilyIndicator(HALF_ARC), h, &grid).unwrap();
            assert!((tv - 2.0).abs() < 1e-9, "h = {h}: {tv}");
        }
    }

    #[test]
    fn torus_strip_matches_surface_tension_times_perimeter() {
        let h = 0.05;
        let grid = QuadratureGrid::with_spacing(Manifold::FlatTorus2, h / 4.0);
        let f = FamilyIndicator(FamilyMember::Strip { axis: StripAxis::U, offset: 0.0 });
        let tv = tv_nonlocal(&f, h, &grid).unwrap();
        assert!((tv / (8.0 / 3.0) - 1.0).abs() < 0.02, "{tv}");
    }

    #[test]
    fn rejects_coarse_grids_and_wide_bandwidths() {
        let grid = QuadratureGrid::new(Manifold::Circle, 10);
        let f = FamilyIndicator(HALF_ARC);
        assert!(matches!(tv_nonlocal(&f, 0.2, &grid), Err(NonlocalError::ResolutionTooCoarse { .. })));
        let grid = QuadratureGrid::new(Manifold::Circle, 1000);
        assert!(matches!(tv_nonlocal(&f, 0.3, &grid), Err(NonlocalError::BandwidthTooLarge { .. })));
        assert!(matches!(tv_nonlocal(&f, -0.1, &grid), Err(NonlocalError::InvalidParameter { .. })));
        let torus = QuadratureGrid::new(Manifold::FlatTorus2, 100);
        assert!(matches!(tv_nonlocal(&f, 0.1, &torus), Err(NonlocalError::ManifoldMismatch { .. })));
    }

    #[test]
    fn nonlocal_tv_is_absolutely_homogeneous() {
        let grid = QuadratureGrid::with_spacing(Manifold::Circle, 0.1 / 8.0);
        let base = tv_nonlocal(&FamilyIndicator(HALF_ARC), 0.1, &grid).unwrap();
        let scaled = FnFunction::new(Manifold::Circle, |x: &[f64]| -2.5 * FamilyIndicator(HALF_ARC).eval(x));
        let tv = tv_nonlocal(&scaled, 0.1, &grid).unwrap();
        assert!((tv - 2.5 * base).abs() < 1e-9);
    }

    #[test]
    fn three_level_layer_cake() {
        // f = 1_{[0, ½)} + 2·1_{[0, ¼)}: levels 0, 1, 3
        let m = Manifold::Circle;
        let arc = |lo: f64, hi: f64| move |x: &[f64]| {
            let t = m.intrinsic(x)[0];
            if t >= lo && t < hi {
                1.0
            } else {
                0.0
            }
        };
        let (a, b) = (arc(0.0, 0.5), arc(0.0, 0.25));
        let f = FnFunction::new(m, move |x: &[f64]| a(x) + 2.0 * b(x));
        let grid = QuadratureGrid::with_spacing(m, 0.05 / 8.0);
        let h = 0.05;
        let whole = tv_nonlocal(&f, h, &grid).unwrap();
        // superlevel sets: {f > t} is [0, ½) for t ∈ [0, 1) and [0, ¼) for t ∈ [1, 3)
        let upper_half = tv_nonlocal(&FnFunction::new(m, arc(0.0, 0.5)), h, &grid).unwrap();
        let upper_quarter = tv_nonlocal(&FnFunction::new(m, arc(0.0, 0.25)), h, &grid).unwrap();
        assert!((whole - (upper_half + 2.0 * upper_quarter)).abs() < 1e-9);
    }

    #[test]
    fn local_tv_of_sines() {
        let c = FnFunction::new(Manifold::Circle, |x: &[f64]| (2.0 * PI * Manifold::Circle.intrinsic(x)[0]).sin());
        let tv = tv_local_smooth(&c, &QuadratureGrid::new(Manifold::Circle, 2000));
        assert!((tv - 4.0).abs() < 1e-4, "{tv}");
        let t = FnFunction::new(Manifold::FlatTorus2, |x: &[f64]| (2.0 * PI * Manifold::FlatTorus2.intrinsic(x)[0]).sin());
        let tv = tv_local_smooth(&t, &QuadratureGrid::new(Manifold::FlatTorus2, 200));
        assert!((tv - 4.0).abs() < 1e-3, "{tv}");
        let k = Constant { manifold: Manifold::Sphere2, value: 1.0 };
        assert_eq!(tv_local_smooth(&k, &QuadratureGrid::new(Manifold::Sphere2, 20)), 0.0);
    }

    #[test]
    fn functional_form_of_half_arc_is_four() {
        let grid = QuadratureGrid::new(Manifold::Circle, 400);
        let r = cheeger_functional_form(&FamilyIndicator(HALF_ARC), &grid).unwrap();
        assert!((r.value - 4.0).abs() < 1e-9, "{r:?}");
        let flat = Constant { manifold: Manifold::Circle, value: 0.3 };
        assert!(matches!(cheeger_functional_form(&flat, &grid), Err(NonlocalError::DegenerateFunction { .. })));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let c = golden_section(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-10);
        assert!((c - 0.3).abs() < 1e-9);
    }
}
