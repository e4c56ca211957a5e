use serde::Serialize;

use crate::manifold::{CheegerReference, FamilyMember, Manifold, StripAxis};
use crate::nonlocal::{golden_section, ContinuumFunction, QuadratureGrid};
use crate::scalar::compensated_sum;

/// Closest member of a minimizer family in the `L¹` sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FraenkelMatch {
    /// `min_p vol(E ⊖ E*(p))`, or `min_p ‖f − 1_{E*(p)}‖_{L¹}` for non-indicators.
    pub asymmetry: f64,
    pub member: FamilyMember,
}

const SCAN: usize = 256;
const SPHERE_LEVELS: usize = 6;

/// Fraenkel asymmetry of `f` with respect to the family of `reference`, by
/// a coarse scan of the family parameter followed by local refinement.
pub fn fraenkel_asymmetry<F: ContinuumFunction + ?Sized>(
    f: &F,
    reference: &CheegerReference,
    grid: &QuadratureGrid,
) -> FraenkelMatch {
    assert_eq!(f.manifold(), grid.manifold(), "function and grid on different manifolds");
    let values: Vec<f64> = (0..grid.len()).map(|i| f.eval(grid.node(i))).collect();
    fraenkel_from_values(&values, reference, grid)
}

/// `‖values − 1_{member}‖_{L¹}` on the grid.
pub fn symmetric_difference(values: &[f64], member: &FamilyMember, grid: &QuadratureGrid) -> f64 {
    let w = grid.weights();
    compensated_sum((0..grid.len()).map(|i| {
        let inside = if member.contains(grid.node(i)) { 1.0 } else { 0.0 };
        w[i] * (values[i] - inside).abs()
    }))
}

/// [`fraenkel_asymmetry`] for precomputed node values.
pub fn fraenkel_from_values(values: &[f64], reference: &CheegerReference, grid: &QuadratureGrid) -> FraenkelMatch {
    assert_eq!(values.len(), grid.len());
    let cost = |m: &FamilyMember| symmetric_difference(values, m, grid);
    let best_of = |members: &mut dyn Iterator<Item = FamilyMember>| {
        members
            .map(|m| (cost(&m), m))
            .fold(None, |best: Option<(f64, FamilyMember)>, c| match best {
                Some(b) if b.0 <= c.0 => Some(b),
                _ => Some(c),
            })
            .expect("nonempty candidate set")
    };
    let (asymmetry, member) = match reference.manifold {
        Manifold::Circle => {
            let arc = |c: f64| FamilyMember::HalfArc { center: c.rem_euclid(1.0) };
            let (_, coarse) = best_of(&mut (0..SCAN).map(|k| arc(k as f64 / SCAN as f64)));
            let FamilyMember::HalfArc { center } = coarse else { unreachable!() };
            refine_1d(&cost, arc, center, 1.0 / SCAN as f64, grid.spacing(), coarse)
        }
        Manifold::FlatTorus2 => {
            let strip = |axis: StripAxis| move |c: f64| FamilyMember::Strip { axis, offset: c.rem_euclid(1.0) };
            let mut scan = [StripAxis::U, StripAxis::V]
                .into_iter()
                .flat_map(|axis| (0..SCAN).map(move |k| strip(axis)(k as f64 / SCAN as f64)));
            let (_, coarse) = best_of(&mut scan);
            let FamilyMember::Strip { axis, offset } = coarse else { unreachable!() };
            refine_1d(&cost, strip(axis), offset, 1.0 / SCAN as f64, grid.spacing(), coarse)
        }
        Manifold::Sphere2 => {
            // colatitude/longitude lattice of poles, then shrinking tangent stencils
            let step0 = std::f64::consts::PI / 12.0;
            let mut poles = Vec::new();
            for i in 0..=12 {
                let colat = i as f64 * step0;
                let count = if i == 0 || i == 12 { 1 } else { 24 };
                for j in 0..count {
                    let lon = j as f64 * 2.0 * std::f64::consts::PI / count as f64;
                    poles.push([colat.sin() * lon.cos(), colat.sin() * lon.sin(), colat.cos()]);
                }
            }
            let mut best = best_of(&mut poles.into_iter().map(|pole| FamilyMember::Hemisphere { pole }));
            let mut step = step0;
            for _ in 0..SPHERE_LEVELS {
                step *= 0.5;
                let FamilyMember::Hemisphere { pole } = best.1 else { unreachable!() };
                let [e1, e2] = tangent_basis(pole);
                let mut stencil = (-3i32..=3).flat_map(|a| (-3i32..=3).map(move |b| (a, b))).map(|(a, b)| {
                    let (s, t) = (a as f64 * step / 3.0 * 2.0, b as f64 * step / 3.0 * 2.0);
                    let p = [0, 1, 2].map(|k| pole[k] + s * e1[k] + t * e2[k]);
                    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    FamilyMember::Hemisphere { pole: p.map(|v| v / norm) }
                });
                let cand = best_of(&mut stencil);
                if cand.0 < best.0 {
                    best = cand;
                }
            }
            best
        }
    };
    FraenkelMatch { asymmetry, member }
}

fn refine_1d(
    cost: &dyn Fn(&FamilyMember) -> f64,
    make: impl Fn(f64) -> FamilyMember,
    center: f64,
    width: f64,
    spacing: f64,
    coarse: FamilyMember,
) -> (f64, FamilyMember) {
    let t = golden_section(|c| cost(&make(c)), center - width, center + width, 1e-9);
    // the grid cost is a staircase, so also scan the bracket at half the node spacing
    let steps = (2.0 * width / (0.5 * spacing)).ceil() as usize;
    let scan = (0..=steps).map(|k| center - width + 2.0 * width * k as f64 / steps as f64);
    let mut best = (cost(&coarse), coarse);
    for c in std::iter::once(t).chain(scan) {
        let m = make(c);
        let v = cost(&m);
        if v < best.0 {
            best = (v, m);
        }
    }
    best
}

fn tangent_basis(p: [f64; 3]) -> [[f64; 3]; 2] {
    let a = if p[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let cross = |u: [f64; 3], v: [f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let e1 = cross(a, p);
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = e1.map(|v| v / n);
    [e1, cross(p, e1)]
}
