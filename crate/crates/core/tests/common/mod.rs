//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the functional code paths it checks.

#![allow(dead_code)]

use std::f64::consts::PI;

use cheeger_core::consistency::{Ball, Region};
use cheeger_core::{FamilyMember, Manifold, PointCloud, StripAxis};

pub fn euclid2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Sorted neighbor lists of the ε-graph by comparing every pair.
pub fn brute_neighbors(cloud: &PointCloud<f64>, eps: f64) -> Vec<Vec<u32>> {
    let n = cloud.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && euclid2(cloud.point(i), cloud.point(j)) <= eps * eps)
                .map(|j| j as u32)
                .collect()
        })
        .collect()
}

/// `(1/(n² ε^{m+1})) Σ_{i≠j, |x_i−x_j|≤ε} |u_i − u_j|`, summed pairwise in O(n²).
pub fn brute_gtv(cloud: &PointCloud<f64>, eps: f64, m: usize, u: &[f64]) -> f64 {
    let n = cloud.len();
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && euclid2(cloud.point(i), cloud.point(j)) <= eps * eps {
                // Kahan summation
                let y = (u[i] - u[j]).abs() - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
        }
    }
    sum / ((n * n) as f64 * eps.powi(m as i32 + 1))
}

/// Unordered edge count with exactly one endpoint in `mask`.
pub fn brute_cut(cloud: &PointCloud<f64>, eps: f64, mask: &[bool]) -> u64 {
    let n = cloud.len();
    let mut cut = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask[i] != mask[j] && euclid2(cloud.point(i), cloud.point(j)) <= eps * eps {
                cut += 1;
            }
        }
    }
    cut
}

/// Longest edge of the Euclidean minimum spanning tree (Prim, O(n²)): the
/// smallest ε for which the ε-graph is connected.
pub fn connectivity_threshold(cloud: &PointCloud<f64>) -> f64 {
    let n = cloud.len();
    let mut best = vec![f64::INFINITY; n];
    let mut used = vec![false; n];
    best[0] = 0.0;
    let mut longest: f64 = 0.0;
    for _ in 0..n {
        let i = (0..n).filter(|&i| !used[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
        used[i] = true;
        longest = longest.max(best[i]);
        for j in 0..n {
            if !used[j] {
                best[j] = best[j].min(euclid2(cloud.point(i), cloud.point(j)).sqrt());
            }
        }
    }
    longest
}

/// Closed-form isoperimetric profiles, written out from the geometry of
/// arcs, disks/strips and spherical caps.
pub fn profile(m: Manifold, v: f64) -> f64 {
    match m {
        Manifold::Circle => 2.0,
        Manifold::FlatTorus2 => {
            let s = v.min(1.0 - v);
            // a disk of area s has perimeter 2√(πs); two parallel loops have length 2
            (2.0 * (PI * s).sqrt()).min(2.0)
        }
        Manifold::Sphere2 => {
            // radius R with 4πR² = 1; cap of area fraction v has polar angle θ with v = (1 − cos θ)/2
            let r = 1.0 / (4.0 * PI).sqrt();
            let theta = (1.0 - 2.0 * v).acos();
            2.0 * PI * r * theta.sin()
        }
    }
}

/// Composite 5-point Gauss–Legendre with a smoothstep change of variables,
/// which absorbs square-root behaviour at both ends of `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    if b <= a {
        return 0.0;
    }
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for k in 0..5 {
            let s = mid + 0.5 * h * X[k];
            let t = a + (b - a) * s * s * (3.0 - 2.0 * s);
            let jac = (b - a) * 6.0 * s * (1.0 - s);
            total += 0.5 * h * W[k] * f(t) * jac;
        }
    }
    total
}

/// Length of the intersection of the arcs `[c1 − l1, c1 + l1)` and `[c2 − l2, c2 + l2)` on the unit circle.
fn arc_overlap(c1: f64, l1: f64, c2: f64, l2: f64) -> f64 {
    (-2..=2)
        .map(|k| {
            let lo = (c1 - l1).max(c2 - l2 + k as f64);
            let hi = (c1 + l1).min(c2 + l2 + k as f64);
            (hi - lo).max(0.0)
        })
        .sum()
}

/// Exact area of the intersection of a flat disk with a torus strip.
fn disk_strip_overlap(center: [f64; 2], r: f64, axis: StripAxis, offset: f64) -> f64 {
    let c = match axis {
        StripAxis::U => center[0],
        StripAxis::V => center[1],
    };
    // antiderivative of the chord length 2√(r² − x²)
    let big_f = |x: f64| {
        let x = x.clamp(-r, r);
        x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin()
    };
    (-3..=3)
        .map(|k| {
            let lo = (c - r).max(offset + k as f64);
            let hi = (c + r).min(offset + 0.5 + k as f64);
            if hi > lo {
                big_f(hi - c) - big_f(lo - c)
            } else {
                0.0
            }
        })
        .sum()
}

/// Area of the intersection of a spherical cap with a hemisphere, by a
/// one-dimensional integral over the cap's polar angle with the exact
/// azimuthal fraction.
fn cap_hemisphere_overlap(center: &[f64], radius: f64, pole: [f64; 3]) -> f64 {
    let big_r = 1.0 / (4.0 * PI).sqrt();
    let norm = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
    let c = [center[0] / norm, center[1] / norm, center[2] / norm];
    let along = c[0] * pole[0] + c[1] * pole[1] + c[2] * pole[2];
    let perp = (1.0 - along * along).max(0.0).sqrt();
    let alpha = radius / big_r;
    let fraction = |th: f64| {
        let a = th.cos() * along;
        let b = th.sin() * perp;
        if b <= a.abs() {
            if a >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-a / b).acos() / PI
        }
    };
    let g = |th: f64| fraction(th) * 2.0 * PI * big_r * big_r * th.sin();
    // split at the angle where the cap's circles start to cross the great circle
    let kink = along.abs().atan2(perp);
    if kink > 0.0 && kink < alpha {
        integrate(g, 0.0, kink, 2000) + integrate(g, kink, alpha, 2000)
    } else {
        integrate(g, 0.0, alpha, 2000)
    }
}

/// Volume of a geodesic ball and of its intersection with a family member.
pub fn ball_and_overlap(member: &FamilyMember, ball: &Ball) -> (f64, f64) {
    match *member {
        FamilyMember::HalfArc { center } => {
            let c = Manifold::Circle.intrinsic(&ball.center[..2])[0];
            (2.0 * ball.radius, arc_overlap(c, ball.radius, center, 0.25))
        }
        FamilyMember::Strip { axis, offset } => {
            let c = Manifold::FlatTorus2.intrinsic(&ball.center[..4]);
            (PI * ball.radius * ball.radius, disk_strip_overlap(c, ball.radius, axis, offset))
        }
        FamilyMember::Hemisphere { pole } => {
            let big_r = 1.0 / (4.0 * PI).sqrt();
            let cap = 2.0 * PI * big_r * big_r * (1.0 - (ball.radius / big_r).cos());
            (cap, cap_hemisphere_overlap(&ball.center[..3], ball.radius, pole))
        }
    }
}

/// Volume and symmetric difference (from `member`) of a member with one ball added or removed.
pub fn adjusted_volume(member: &FamilyMember, region: &Region) -> (f64, f64) {
    match region {
        Region::Member { .. } => (member.volume(), 0.0),
        Region::Adjusted { ball, add, .. } => {
            let (ball_vol, overlap) = ball_and_overlap(member, ball);
            if *add {
                let gained = ball_vol - overlap;
                (member.volume() + gained, gained)
            } else {
                (member.volume() - overlap, overlap)
            }
        }
    }
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}
