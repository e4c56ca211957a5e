use crate::manifold::{FamilyMember, Manifold};

/// Real function on a reference manifold, evaluated at ambient points.
pub trait ContinuumFunction: Sync {
    fn manifold(&self) -> Manifold;

    fn eval(&self, x: &[f64]) -> f64;

    /// Known bound on `sup |f|`.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    /// Gradient in the coordinates of [`Manifold::tangent_frame`], when available in closed form.
    fn gradient(&self, _x: &[f64]) -> Option<[f64; 2]> {
        None
    }

    /// Closed-form total variation, when known.
    fn total_variation(&self) -> Option<f64> {
        None
    }

    /// Whether the function only takes the values 0 and 1.
    fn is_indicator(&self) -> bool {
        false
    }
}

impl<F: ContinuumFunction + ?Sized> ContinuumFunction for &F {
    fn manifold(&self) -> Manifold {
        (**self).manifold()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn sup_bound(&self) -> Option<f64> {
        (**self).sup_bound()
    }
    fn gradient(&self, x: &[f64]) -> Option<[f64; 2]> {
        (**self).gradient(x)
    }
    fn total_variation(&self) -> Option<f64> {
        (**self).total_variation()
    }
    fn is_indicator(&self) -> bool {
        (**self).is_indicator()
    }
}

/// Indicator of a member of a minimizer family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyIndicator(pub FamilyMember);

impl ContinuumFunction for FamilyIndicator {
    fn manifold(&self) -> Manifold {
        self.0.manifold()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.0.contains(x) {
            1.0
        } else {
            0.0
        }
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.0)
    }
    fn total_variation(&self) -> Option<f64> {
        Some(self.0.perimeter())
    }
    fn is_indicator(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub manifold: Manifold,
    pub value: f64,
}

impl ContinuumFunction for Constant {
    fn manifold(&self) -> Manifold {
        self.manifold
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(self.value.abs())
    }
    fn gradient(&self, _x: &[f64]) -> Option<[f64; 2]> {
        Some([0.0, 0.0])
    }
    fn total_variation(&self) -> Option<f64> {
        Some(0.0)
    }
    fn is_indicator(&self) -> bool {
        self.value == 0.0 || self.value == 1.0
    }
}

type Gradient = Box<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

/// Function given by a closure, with optional closed-form metadata.
pub struct FnFunction<F> {
    manifold: Manifold,
    f: F,
    gradient: Option<Gradient>,
    sup: Option<f64>,
    tv: Option<f64>,
    indicator: bool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnFunction<F> {
    pub fn new(manifold: Manifold, f: F) -> Self {
        Self { manifold, f, gradient: None, sup: None, tv: None, indicator: false }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Box::new(g));
        self
    }

    pub fn with_sup_bound(mut self, sup: f64) -> Self {
        self.sup = Some(sup);
        self
    }

    pub fn with_total_variation(mut self, tv: f64) -> Self {
        self.tv = Some(tv);
        self
    }

    /// Mark the closure as a set indicator (values in `{0, 1}`).
    pub fn indicator(mut self) -> Self {
        self.indicator = true;
        self.sup = Some(1.0);
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ContinuumFunction for FnFunction<F> {
    fn manifold(&self) -> Manifold {
        self.manifold
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn sup_bound(&self) -> Option<f64> {
        self.sup
    }
    fn gradient(&self, x: &[f64]) -> Option<[f64; 2]> {
        self.gradient.as_ref().map(|g| g(x))
    }
    fn total_variation(&self) -> Option<f64> {
        self.tv
    }
    fn is_indicator(&self) -> bool {
        self.indicator
    }
}

/// Central finite-difference gradient along the tangent frame at `x`.
pub fn finite_difference_gradient<F: ContinuumFunction + ?Sized>(f: &F, x: &[f64], step: f64) -> [f64; 2] {
    let m = f.manifold();
    let dim = m.intrinsic_dim();
    let mut plus = [0.0; 4];
    let mut minus = [0.0; 4];
    let d = m.ambient_dim();
    let mut g = [0.0; 2];
    for (k, gk) in g.iter_mut().enumerate().take(dim) {
        let mut w = [0.0; 2];
        w[k] = step;
        m.exp(x, &w[..dim], &mut plus[..d]);
        w[k] = -step;
        m.exp(x, &w[..dim], &mut minus[..d]);
        *gk = (f.eval(&plus[..d]) - f.eval(&minus[..d])) / (2.0 * step);
    }
    g
}

/// Gradient norm: closed form when the function provides one, finite differences otherwise.
pub(crate) fn gradient_norm<F: ContinuumFunction + ?Sized>(f: &F, x: &[f64], step: f64) -> f64 {
    let g = f.gradient(x).unwrap_or_else(|| finite_difference_gradient(f, x, step));
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}
