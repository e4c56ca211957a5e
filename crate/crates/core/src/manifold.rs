//! Reference manifolds with exact samplers, geodesics and continuum Cheeger data.
//!
//! Every manifold is normalized to unit Riemannian volume:
//!
//! * `Circle`: circle of circumference 1 in the plane, radius `1/(2π)`.
//!   Intrinsic coordinate: arclength `θ ∈ [0, 1)`.
//! * `FlatTorus2`: product of two such circles embedded in `R^4`, which is the
//!   flat unit-square torus. Intrinsic coordinates: `(u, v) ∈ [0, 1)^2`.
//! * `Sphere2`: round sphere of area 1, radius `1/√(4π)`. Intrinsic
//!   coordinates: colatitude and longitude in radians.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::scalar::{norm, Real};

/// Conservative upper bound for graph and kernel length scales, in normalized units.
pub const EPSILON_0: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manifold {
    #[serde(rename = "circle")]
    Circle,
    #[serde(rename = "flat_torus_2")]
    FlatTorus2,
    #[serde(rename = "sphere_2")]
    Sphere2,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown manifold `{0}` (expected circle, flat_torus_2 or sphere_2)")]
pub struct UnknownManifold(pub String);

impl FromStr for Manifold {
    type Err = UnknownManifold;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circle" => Ok(Manifold::Circle),
            "flat_torus_2" => Ok(Manifold::FlatTorus2),
            "sphere_2" => Ok(Manifold::Sphere2),
            other => Err(UnknownManifold(other.to_string())),
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::Circle, Manifold::FlatTorus2, Manifold::Sphere2];

    pub fn name(self) -> &'static str {
        match self {
            Manifold::Circle => "circle",
            Manifold::FlatTorus2 => "flat_torus_2",
            Manifold::Sphere2 => "sphere_2",
        }
    }

    pub fn intrinsic_dim(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::FlatTorus2 | Manifold::Sphere2 => 2,
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            Manifold::Circle => 2,
            Manifold::FlatTorus2 => 4,
            Manifold::Sphere2 => 3,
        }
    }

    /// Radius of the embedded circles (circle, torus) or of the sphere.
    pub fn scale<T: Real>(self) -> T {
        match self {
            Manifold::Circle | Manifold::FlatTorus2 => T::one() / (T::lit(2.0) * T::PI()),
            Manifold::Sphere2 => T::one() / (T::lit(4.0) * T::PI()).sqrt(),
        }
    }

    pub fn epsilon_0(self) -> f64 {
        EPSILON_0
    }

    /// Largest admissible kernel bandwidth `h_M`.
    pub fn h_max(self) -> f64 {
        EPSILON_0
    }

    /// Largest radius for which geodesic balls are embedded.
    pub fn max_ball_radius(self) -> f64 {
        match self {
            Manifold::Circle | Manifold::FlatTorus2 => 0.5,
            Manifold::Sphere2 => std::f64::consts::PI * self.scale::<f64>(),
        }
    }

    /// Deviation of `x` from the embedding constraints; zero exactly on the manifold.
    pub fn constraint_residual<T: Real>(self, x: &[T]) -> T {
        let r = self.scale::<T>();
        let r2 = r * r;
        match self {
            Manifold::Circle | Manifold::Sphere2 => (x.iter().fold(T::zero(), |acc, &v| acc + v * v) - r2).abs(),
            Manifold::FlatTorus2 => {
                let a = x[0] * x[0] + x[1] * x[1] - r2;
                let b = x[2] * x[2] + x[3] * x[3] - r2;
                a.abs().max(b.abs())
            }
        }
    }

    /// Map intrinsic coordinates to ambient coordinates (`out.len() == ambient_dim`).
    pub fn embed<T: Real>(self, intrinsic: &[T], out: &mut [T]) {
        let r = self.scale::<T>();
        let tau = T::lit(2.0) * T::PI();
        match self {
            Manifold::Circle => {
                let a = tau * intrinsic[0];
                out[0] = r * a.cos();
                out[1] = r * a.sin();
            }
            Manifold::FlatTorus2 => {
                let a = tau * intrinsic[0];
                let b = tau * intrinsic[1];
                out[0] = r * a.cos();
                out[1] = r * a.sin();
                out[2] = r * b.cos();
                out[3] = r * b.sin();
            }
            Manifold::Sphere2 => {
                let (colat, lon) = (intrinsic[0], intrinsic[1]);
                let s = colat.sin();
                out[0] = r * s * lon.cos();
                out[1] = r * s * lon.sin();
                out[2] = r * colat.cos();
            }
        }
    }

    /// Inverse of [`Manifold::embed`]. Circle and torus coordinates lie in `[0, 1)`,
    /// sphere coordinates are `(colatitude, longitude ∈ [0, 2π))`.
    pub fn intrinsic<T: Real>(self, x: &[T]) -> [T; 2] {
        let tau = T::lit(2.0) * T::PI();
        let unit_angle = |y: T, x: T| wrap_unit(y.atan2(x) / tau);
        match self {
            Manifold::Circle => [unit_angle(x[1], x[0]), T::zero()],
            Manifold::FlatTorus2 => [unit_angle(x[1], x[0]), unit_angle(x[3], x[2])],
            Manifold::Sphere2 => {
                let r = norm(x);
                let colat = (x[2] / r).max(-T::one()).min(T::one()).acos();
                let mut lon = x[1].atan2(x[0]);
                if lon < T::zero() {
                    lon += tau;
                }
                [colat, lon]
            }
        }
    }

    /// Exact geodesic distance between two points of the manifold.
    pub fn geodesic_distance<T: Real>(self, x: &[T], y: &[T]) -> T {
        let r = self.scale::<T>();
        match self {
            Manifold::Circle | Manifold::Sphere2 => r * central_angle(x, y),
            Manifold::FlatTorus2 => {
                let a = central_angle(&x[0..2], &y[0..2]);
                let b = central_angle(&x[2..4], &y[2..4]);
                r * (a * a + b * b).sqrt()
            }
        }
    }

    /// Orthonormal tangent frame at `x`, as ambient vectors (`m` of them).
    pub fn tangent_frame<T: Real>(self, x: &[T]) -> [[T; 4]; 2] {
        let z = T::zero();
        let r = self.scale::<T>();
        match self {
            Manifold::Circle => [[-x[1] / r, x[0] / r, z, z], [z; 4]],
            Manifold::FlatTorus2 => [[-x[1] / r, x[0] / r, z, z], [z, z, -x[3] / r, x[2] / r]],
            Manifold::Sphere2 => {
                let u = [x[0] / r, x[1] / r, x[2] / r];
                let a = if u[2].abs() < T::lit(0.9) { [z, z, T::one()] } else { [T::one(), z, z] };
                let e1 = normalize3(cross(a, u));
                let e2 = cross(u, e1);
                [[e1[0], e1[1], e1[2], z], [e2[0], e2[1], e2[2], z]]
            }
        }
    }

    /// Geodesic exponential map: walk from `x` along the tangent vector whose
    /// coordinates in [`Manifold::tangent_frame`] are `w` (length `m`).
    pub fn exp<T: Real>(self, x: &[T], w: &[T], out: &mut [T]) {
        match self {
            Manifold::Circle => {
                let th = self.intrinsic(x)[0];
                self.embed(&[th + w[0]], out);
            }
            Manifold::FlatTorus2 => {
                let [u, v] = self.intrinsic(x);
                self.embed(&[u + w[0], v + w[1]], out);
            }
            Manifold::Sphere2 => {
                let frame = self.tangent_frame(x);
                let r = self.scale::<T>();
                let rho = (w[0] * w[0] + w[1] * w[1]).sqrt();
                if rho == T::zero() {
                    out[..3].copy_from_slice(&x[..3]);
                    return;
                }
                let (s, c) = (rho / r).sin_cos();
                for k in 0..3 {
                    let t = (w[0] * frame[0][k] + w[1] * frame[1][k]) / rho;
                    out[k] = c * x[k] + r * s * t;
                }
            }
        }
    }

    /// Ratio between the Riemannian area element in geodesic polar coordinates
    /// and the flat one, at geodesic radius `rho`.
    pub fn polar_jacobian<T: Real>(self, rho: T) -> T {
        match self {
            Manifold::Circle | Manifold::FlatTorus2 => T::one(),
            Manifold::Sphere2 => {
                let t = rho / self.scale::<T>();
                if t == T::zero() {
                    T::one()
                } else {
                    t.sin() / t
                }
            }
        }
    }

    /// Volume of a geodesic ball of radius `rho ≤ max_ball_radius`.
    pub fn ball_volume(self, rho: f64) -> f64 {
        let r = self.scale::<f64>();
        match self {
            Manifold::Circle => (2.0 * rho).min(1.0),
            Manifold::FlatTorus2 => std::f64::consts::PI * rho * rho,
            Manifold::Sphere2 => 2.0 * std::f64::consts::PI * r * r * (1.0 - (rho / r).cos()),
        }
    }

    /// Perimeter of a geodesic ball of radius `rho`.
    pub fn ball_perimeter(self, rho: f64) -> f64 {
        let r = self.scale::<f64>();
        match self {
            Manifold::Circle => 2.0,
            Manifold::FlatTorus2 => 2.0 * std::f64::consts::PI * rho,
            Manifold::Sphere2 => 2.0 * std::f64::consts::PI * r * (rho / r).sin(),
        }
    }
}

/// Draw `n` i.i.d. uniform points on `manifold`; a pure function of `(manifold, n, seed)`.
pub fn sample<T: Real>(manifold: Manifold, n: usize, seed: u64) -> PointCloud<T> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = manifold.ambient_dim();
    let mut coords = vec![T::zero(); n * d];
    for p in coords.chunks_exact_mut(d) {
        match manifold {
            Manifold::Circle => {
                let th: f64 = rng.random();
                manifold.embed(&[T::lit(th)], p);
            }
            Manifold::FlatTorus2 => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                manifold.embed(&[T::lit(u), T::lit(v)], p);
            }
            Manifold::Sphere2 => {
                let r = manifold.scale::<f64>();
                let g = loop {
                    let g: [f64; 3] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    if norm(&g) > 1e-12 {
                        break g;
                    }
                };
                let len = norm(&g);
                for k in 0..3 {
                    p[k] = T::lit(r * g[k] / len);
                }
            }
        }
    }
    PointCloud::new(manifold, seed, coords)
}

/// Angle subtended at the origin by two vectors, computed stably.
pub(crate) fn central_angle<T: Real>(x: &[T], y: &[T]) -> T {
    let mut diff = T::zero();
    let mut sum = T::zero();
    for (a, b) in x.iter().zip(y) {
        diff += (*a - *b) * (*a - *b);
        sum += (*a + *b) * (*a + *b);
    }
    T::lit(2.0) * diff.sqrt().atan2(sum.sqrt())
}

pub(crate) fn wrap_unit<T: Real>(t: T) -> T {
    let w = t - t.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize3<T: Real>(a: [T; 3]) -> [T; 3] {
    let l = norm(&a);
    [a[0] / l, a[1] / l, a[2] / l]
}

/// Axis along which a torus strip is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripAxis {
    U,
    V,
}

/// One member of the family of continuum Cheeger minimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyMember {
    /// Arc `[center − ¼, center + ¼)` of the circle.
    HalfArc { center: f64 },
    /// `{ (u, v) : (coord − offset) mod 1 < ½ }` where `coord` is selected by `axis`.
    Strip { axis: StripAxis, offset: f64 },
    /// `{ x : ⟨x, pole⟩ ≥ 0 }` for a unit `pole`.
    Hemisphere { pole: [f64; 3] },
}

impl FamilyMember {
    pub fn manifold(&self) -> Manifold {
        match self {
            FamilyMember::HalfArc { .. } => Manifold::Circle,
            FamilyMember::Strip { .. } => Manifold::FlatTorus2,
            FamilyMember::Hemisphere { .. } => Manifold::Sphere2,
        }
    }

    pub fn contains<T: Real>(&self, x: &[T]) -> bool {
        match *self {
            FamilyMember::HalfArc { center } => {
                let th = Manifold::Circle.intrinsic(x)[0].as_f64();
                wrap_unit(th - center + 0.25) < 0.5
            }
            FamilyMember::Strip { axis, offset } => {
                let [u, v] = Manifold::FlatTorus2.intrinsic(x);
                let c = match axis {
                    StripAxis::U => u,
                    StripAxis::V => v,
                }
                .as_f64();
                wrap_unit(c - offset) < 0.5
            }
            FamilyMember::Hemisphere { pole } => {
                let dot = x[0].as_f64() * pole[0] + x[1].as_f64() * pole[1] + x[2].as_f64() * pole[2];
                dot >= 0.0
            }
        }
    }

    pub fn volume(&self) -> f64 {
        0.5
    }

    /// Closed-form perimeter of the member.
    pub fn perimeter(&self) -> f64 {
        match self {
            FamilyMember::HalfArc { .. } => 2.0,
            FamilyMember::Strip { .. } => 2.0,
            FamilyMember::Hemisphere { .. } => 2.0 * std::f64::consts::PI * Manifold::Sphere2.scale::<f64>(),
        }
    }

    /// The member occupying the complementary half.
    pub fn complement(&self) -> FamilyMember {
        match *self {
            FamilyMember::HalfArc { center } => FamilyMember::HalfArc { center: wrap_unit(center + 0.5) },
            FamilyMember::Strip { axis, offset } => FamilyMember::Strip { axis, offset: wrap_unit(offset + 0.5) },
            FamilyMember::Hemisphere { pole } => FamilyMember::Hemisphere { pole: [-pole[0], -pole[1], -pole[2]] },
        }
    }
}

/// Closed-form continuum Cheeger data of a reference manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerReference {
    pub manifold: Manifold,
    /// The Cheeger constant `C_M`.
    pub constant: f64,
}

impl CheegerReference {
    /// Isoperimetric profile: least perimeter among sets of volume `v ∈ (0, 1)`.
    pub fn isoperimetric_profile(&self, v: f64) -> f64 {
        use std::f64::consts::PI;
        match self.manifold {
            Manifold::Circle => 2.0,
            // disks (radius below ½) versus pairs of parallel geodesics
            Manifold::FlatTorus2 => {
                let small = v.min(1.0 - v);
                (2.0 * (PI * small).sqrt()).min(2.0)
            }
            // spherical caps
            Manifold::Sphere2 => 2.0 * (PI * v * (1.0 - v)).sqrt(),
        }
    }

    /// `𝕀(v) / min(v, 1 − v)`, minimized at `v = ½` with value `C_M`.
    pub fn balanced_profile(&self, v: f64) -> f64 {
        self.isoperimetric_profile(v) / v.min(1.0 - v)
    }

    /// A fixed representative of the minimizer family.
    pub fn canonical_member(&self) -> FamilyMember {
        match self.manifold {
            Manifold::Circle => FamilyMember::HalfArc { center: 0.25 },
            Manifold::FlatTorus2 => FamilyMember::Strip { axis: StripAxis::U, offset: 0.0 },
            Manifold::Sphere2 => FamilyMember::Hemisphere { pole: [0.0, 0.0, 1.0] },
        }
    }

    /// Perimeter shared by every member of the minimizer family (`C_M / 2`).
    pub fn minimizer_perimeter(&self) -> f64 {
        self.canonical_member().perimeter()
    }
}

/// Continuum Cheeger constant and minimizer family for `manifold`.
pub fn continuum_cheeger(manifold: Manifold) -> CheegerReference {
    let constant = match manifold {
        Manifold::Circle => 4.0,
        Manifold::FlatTorus2 => 4.0,
        Manifold::Sphere2 => 2.0 * std::f64::consts::PI.sqrt(),
    };
    CheegerReference { manifold, constant }
}
