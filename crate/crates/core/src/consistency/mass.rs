use std::f64::consts::PI;

use serde::Serialize;

use crate::manifold::{FamilyMember, Manifold};
use crate::nonlocal::{ContinuumFunction, QuadratureGrid};

use super::ConsistencyError;

/// Geodesic ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: [f64; 4],
    pub radius: f64,
}

/// A measurable set built from a family member by adding or removing balls,
/// carrying its volume.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Member { member: FamilyMember },
    Adjusted { base: Box<Region>, ball: Ball, add: bool, volume: f64, manifold: Manifold },
}

impl Region {
    pub fn member(member: FamilyMember) -> Self {
        Region::Member { member }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Member { member } => member.volume(),
            Region::Adjusted { volume, .. } => *volume,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Member { member } => member.contains(x),
            Region::Adjusted { base, ball, add, manifold, .. } => {
                let d = manifold.ambient_dim();
                let in_ball = manifold.geodesic_distance(x, &ball.center[..d]) < ball.radius;
                if *add {
                    base.contains(x) || in_ball
                } else {
                    base.contains(x) && !in_ball
                }
            }
        }
    }
}

impl ContinuumFunction for Region {
    fn manifold(&self) -> Manifold {
        match self {
            Region::Member { member } => member.manifold(),
            Region::Adjusted { manifold, .. } => *manifold,
        }
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
    fn is_indicator(&self) -> bool {
        true
    }
}

/// Outcome of a volume correction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassFix {
    pub region: Region,
    pub volume: f64,
    pub target: f64,
    /// Volume of the symmetric difference from the input set.
    pub symmetric_difference: f64,
    /// `P(B(x, r))`, an upper bound on the perimeter increase.
    pub perimeter_increment: f64,
    pub ball: Option<Ball>,
}

const DIRECTIONS: usize = 2048;
const RAY_SAMPLES: usize = 400;
const VOLUME_TOLERANCE: f64 = 1e-7;

/// Add (target above the current volume) or remove a geodesic ball so that the
/// volume becomes `target`. Centers are scanned over the nodes of `candidates`,
/// nodes next to the boundary of the set first, in index order; the radius is
/// found by bisection on the ray-cast volume of the ball part and polished by
/// Newton steps on an adaptive angular quadrature.
pub fn fix_mass(region: &Region, target: f64, candidates: &QuadratureGrid) -> Result<MassFix, ConsistencyError> {
    let manifold = region.manifold();
    let volume = region.volume();
    if !(target > 0.0 && target < 1.0) {
        return Err(ConsistencyError::InfeasibleMass { target, reason: "target outside (0, 1)" });
    }
    let change = target - volume;
    if change == 0.0 {
        return Ok(MassFix {
            region: region.clone(),
            volume,
            target,
            symmetric_difference: 0.0,
            perimeter_increment: 0.0,
            ball: None,
        });
    }
    let add = change > 0.0;
    let need = change.abs();
    // ball part lies where membership must flip
    let flips = |x: &[f64]| region.contains(x) != add;
    let inside: Vec<bool> = (0..candidates.len()).map(|i| flips(candidates.node(i))).collect();
    let reach = 1.5 * candidates.spacing();
    let mut boundary = Vec::new();
    let mut interior = Vec::new();
    for i in 0..candidates.len() {
        if !inside[i] {
            continue;
        }
        let mut touches = false;
        candidates.for_each_near(candidates.node(i), reach, |j| touches |= !inside[j]);
        if touches {
            boundary.push(i);
        } else {
            interior.push(i);
        }
    }
    let r_max = match manifold {
        Manifold::Circle => 0.5,
        Manifold::FlatTorus2 => 0.5,
        Manifold::Sphere2 => manifold.max_ball_radius(),
    } * (1.0 - 1e-9);
    for &i in boundary.iter().chain(&interior) {
        let center = candidates.node(i);
        let rays = RayProfile::cast(manifold, center, r_max, &flips);
        if rays.volume(r_max) < need {
            continue;
        }
        let (mut lo, mut hi) = (0.0, r_max);
        while rays.volume(hi) - need > VOLUME_TOLERANCE * 0.5 {
            let mid = 0.5 * (lo + hi);
            if rays.volume(mid) < need {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let (radius, part) = rays.refine(hi, need, r_max, &flips);
        let mut c = [0.0; 4];
        c[..center.len()].copy_from_slice(center);
        let ball = Ball { center: c, radius };
        let new_volume = if add { volume + part } else { volume - part };
        return Ok(MassFix {
            region: Region::Adjusted { base: Box::new(region.clone()), ball, add, volume: new_volume, manifold },
            volume: new_volume,
            target,
            symmetric_difference: part,
            perimeter_increment: manifold.ball_perimeter(radius),
            ball: Some(ball),
        });
    }
    Err(ConsistencyError::InfeasibleMass { target, reason: "no candidate ball can supply the volume" })
}

/// Membership intervals along geodesic rays from a center, for evaluation of
/// `vol(B(x, r) ∩ S)` as a function of `r`.
struct RayProfile {
    manifold: Manifold,
    center: Vec<f64>,
    // per ray: [start, end) radial intervals inside S
    intervals: Vec<Vec<(f64, f64)>>,
    ray_weight: f64,
}

impl RayProfile {
    fn cast(manifold: Manifold, center: &[f64], r_max: f64, inside: &dyn Fn(&[f64]) -> bool) -> Self {
        let dim = manifold.intrinsic_dim();
        let (intervals, ray_weight) = if dim == 1 {
            let rays = [0.0, PI].iter().map(|&t| trace(manifold, center, t, r_max, inside)).collect();
            (rays, 1.0)
        } else {
            let rays = (0..DIRECTIONS)
                .map(|k| trace(manifold, center, 2.0 * PI * (k as f64 + 0.5) / DIRECTIONS as f64, r_max, inside))
                .collect();
            (rays, 2.0 * PI / DIRECTIONS as f64)
        };
        Self { manifold, center: center.to_vec(), intervals, ray_weight }
    }

    /// `∫ ρ^{m−1} J(ρ) dρ` over `[a, b]`, in closed form.
    fn radial(&self, a: f64, b: f64) -> f64 {
        match self.manifold {
            Manifold::Circle => b - a,
            Manifold::FlatTorus2 => 0.5 * (b * b - a * a),
            Manifold::Sphere2 => {
                let r: f64 = self.manifold.scale();
                r * r * ((a / r).cos() - (b / r).cos())
            }
        }
    }

    /// `ρ^{m−1} J(ρ)`.
    fn density(&self, rho: f64) -> f64 {
        match self.manifold {
            Manifold::Circle => 1.0,
            Manifold::FlatTorus2 => rho,
            Manifold::Sphere2 => {
                let r: f64 = self.manifold.scale();
                r * (rho / r).sin()
            }
        }
    }

    fn ray_volume(&self, ray: &[(f64, f64)], radius: f64) -> f64 {
        ray.iter().take_while(|&&(a, _)| a < radius).map(|&(a, b)| self.radial(a, b.min(radius))).sum()
    }

    /// Midpoint-rule volume over the cast rays.
    fn volume(&self, radius: f64) -> f64 {
        self.intervals.iter().map(|ray| self.ray_volume(ray, radius)).sum::<f64>() * self.ray_weight
    }

    /// Midpoint-rule `d/dr` of [`Self::volume`].
    fn slope(&self, radius: f64) -> f64 {
        let hits = self.intervals.iter().filter(|ray| ray.iter().any(|&(a, b)| a < radius && radius < b)).count();
        hits as f64 * self.ray_weight * self.density(radius)
    }

    /// Volume with adaptive angular quadrature, tracing rays on demand.
    fn accurate_volume(&self, radius: f64, r_max: f64, inside: &dyn Fn(&[f64]) -> bool) -> f64 {
        if self.manifold.intrinsic_dim() == 1 {
            return self.volume(radius);
        }
        let f = |t: f64| self.ray_volume(&trace(self.manifold, &self.center, t, r_max, inside), radius);
        let panels = 64;
        let h = 2.0 * PI / panels as f64;
        let tol = 1e-11 / panels as f64;
        (0..panels)
            .map(|p| {
                let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
                let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
                adaptive_simpson(&f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 30)
            })
            .sum()
    }

    /// Newton steps on the accurate volume from the midpoint-rule radius.
    fn refine(&self, start: f64, need: f64, r_max: f64, inside: &dyn Fn(&[f64]) -> bool) -> (f64, f64) {
        let mut r = start;
        let mut v = self.accurate_volume(r, r_max, inside);
        for _ in 0..8 {
            let d = self.slope(r);
            if (v - need).abs() < 1e-11 || d <= 0.0 {
                break;
            }
            let next = (r - (v - need) / d).clamp(0.0, r_max);
            let nv = self.accurate_volume(next, r_max, inside);
            if (nv - need).abs() >= (v - need).abs() {
                break;
            }
            (r, v) = (next, nv);
        }
        (r, v)
    }
}

/// Radial intervals inside the set along the ray at angle `t`.
fn trace(manifold: Manifold, center: &[f64], t: f64, r_max: f64, inside: &dyn Fn(&[f64]) -> bool) -> Vec<(f64, f64)> {
    let dim = manifold.intrinsic_dim();
    let d = manifold.ambient_dim();
    let dir = [t.cos(), t.sin()];
    let mut buf = [0.0; 4];
    let mut at = |rho: f64| {
        let w = [dir[0] * rho, dir[1] * rho];
        manifold.exp(center, &w[..dim], &mut buf[..d]);
        inside(&buf[..d])
    };
    let mut out = Vec::new();
    let step = r_max / RAY_SAMPLES as f64;
    let mut prev_rho = 0.0;
    let mut prev = at(0.0);
    let mut open = prev.then_some(0.0);
    for s in 1..=RAY_SAMPLES {
        let rho = s as f64 * step;
        let cur = at(rho);
        if cur != prev {
            // locate the switch by bisection
            let (mut a, mut b) = (prev_rho, rho);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if at(mid) == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let cross = 0.5 * (a + b);
            match open.take() {
                Some(start) => out.push((start, cross)),
                None => open = Some(cross),
            }
        }
        prev = cur;
        prev_rho = rho;
    }
    if let Some(start) = open {
        out.push((start, r_max));
    }
    out
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = simpson(a, m, fa, lm, fm);
    let right = simpson(m, b, fm, rm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive_simpson(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)
}
