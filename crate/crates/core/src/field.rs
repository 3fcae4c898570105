//! Scalar fields with analytic or finite-difference derivatives.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::FieldError;

/// Smoothness class advertised by a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
pub type HessFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A scalar field on a subset of R^D.
///
/// Missing derivatives fall back to central differences. Cloning is cheap.
#[derive(Clone)]
pub struct Field {
    dim: usize,
    smoothness: Smoothness,
    label: String,
    value: ValueFn,
    gradient: Option<GradFn>,
    hessian: Option<HessFn>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("smoothness", &self.smoothness)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

/// Default central-difference step for first derivatives at `s`.
pub fn default_step(s: &[f64]) -> f64 {
    1e-5 * (1.0 + crate::linalg::norm(s))
}

/// Default step for second derivatives computed from values alone.
pub fn default_value_hessian_step(s: &[f64]) -> f64 {
    1e-4 * (1.0 + crate::linalg::norm(s))
}

impl Field {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        smoothness: Smoothness,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 1, "field dimension must be at least 1");
        Field {
            dim,
            smoothness,
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
            hessian: None,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian(
        mut self,
        hess: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(hess));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn value(&self, s: &[f64]) -> f64 {
        (self.value)(s)
    }

    pub fn gradient(&self, s: &[f64]) -> DVector<f64> {
        match &self.gradient {
            Some(g) => g(s),
            None => central_gradient(&*self.value, s, default_step(s)),
        }
    }

    pub fn hessian(&self, s: &[f64]) -> DMatrix<f64> {
        match (&self.hessian, &self.gradient) {
            (Some(h), _) => h(s),
            (None, Some(g)) => jacobian_of_gradient(&**g, s, default_step(s)),
            (None, None) => central_hessian(&*self.value, s, default_value_hessian_step(s)),
        }
    }

    /// Magnitude below which gradient values are indistinguishable from rounding.
    pub fn gradient_noise_floor(&self) -> f64 {
        if self.gradient.is_some() {
            1e-12
        } else {
            1e-8
        }
    }

    /// Magnitude below which Hessian eigenvalues are indistinguishable from rounding.
    pub fn hessian_noise_floor(&self) -> f64 {
        match (&self.hessian, &self.gradient) {
            (Some(_), _) => 1e-12,
            (None, Some(_)) => 1e-8,
            (None, None) => 1e-5,
        }
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Field, scale: f64) -> Field {
        assert_eq!(self.dim, other.dim, "fields must share a dimension");
        let (a, b) = (self.clone(), other.clone());
        let label = alloc::format!("{} + {:e}*({})", self.label, scale, other.label);
        let smooth = self.smoothness.min(other.smoothness);
        let (va, vb) = (a.value.clone(), b.value.clone());
        let mut out = Field::new(self.dim, label, smooth, move |s| va(s) + scale * vb(s));
        if a.gradient.is_some() && b.gradient.is_some() {
            let (ga, gb) = (a.clone(), b.clone());
            out = out.with_gradient(move |s| ga.gradient(s) + gb.gradient(s) * scale);
        }
        if a.hessian.is_some() && b.hessian.is_some() {
            out = out.with_hessian(move |s| a.hessian(s) + b.hessian(s) * scale);
        }
        out
    }

    /// `-self`.
    pub fn negated(&self) -> Field {
        let a = self.clone();
        let va = a.value.clone();
        let mut out = Field::new(
            self.dim,
            alloc::format!("-({})", self.label),
            self.smoothness,
            move |s| -va(s),
        );
        if let Some(g) = a.gradient.clone() {
            out = out.with_gradient(move |s| -g(s));
        }
        if let Some(h) = a.hessian.clone() {
            out = out.with_hessian(move |s| -h(s));
        }
        out
    }

    /// `self + a . s`.
    pub fn with_linear_term(&self, a: &[f64]) -> Field {
        assert_eq!(a.len(), self.dim);
        self.add_scaled(&linear(a), 1.0)
    }
}

/// The linear field `s -> a . s`.
pub fn linear(a: &[f64]) -> Field {
    let d = a.len();
    let av: Vec<f64> = a.to_vec();
    let ag = DVector::from_column_slice(a);
    Field::new(d, "linear", Smoothness::C2, move |s| crate::linalg::dot(&av, s))
        .with_gradient(move |_| ag.clone())
        .with_hessian(move |_| DMatrix::zeros(d, d))
}

/// The quadratic form `s -> 1/2 s' A s + b . s + c` with symmetric `A`.
pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Field {
    let d = a.nrows();
    assert!(a.is_square() && b.len() == d);
    let a = crate::linalg::symmetrize(&a);
    let (av, bv) = (a.clone(), b.clone());
    let (ag, bg) = (a.clone(), b);
    Field::new(d, "quadratic", Smoothness::C2, move |s| {
        let x = DVector::from_column_slice(s);
        0.5 * x.dot(&(&av * &x)) + bv.dot(&x) + c
    })
    .with_gradient(move |s| &ag * DVector::from_column_slice(s) + &bg)
    .with_hessian(move |_| a.clone())
}

/// The constant field.
pub fn constant(dim: usize, c: f64) -> Field {
    Field::new(dim, "constant", Smoothness::C2, move |_| c)
        .with_gradient(move |_| DVector::zeros(dim))
        .with_hessian(move |_| DMatrix::zeros(dim, dim))
}

fn shifted(s: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut x = s.to_vec();
    x[i] += delta;
    x
}

/// Central-difference gradient of a value function.
pub fn central_gradient(f: &dyn Fn(&[f64]) -> f64, s: &[f64], h: f64) -> DVector<f64> {
    DVector::from_iterator(
        s.len(),
        (0..s.len()).map(|i| (f(&shifted(s, i, h)) - f(&shifted(s, i, -h))) / (2.0 * h)),
    )
}

/// Central-difference Hessian from values; symmetric by construction.
pub fn central_hessian(f: &dyn Fn(&[f64]) -> f64, s: &[f64], h: f64) -> DMatrix<f64> {
    let d = s.len();
    let f0 = f(s);
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let fp = f(&shifted(s, i, h));
        let fm = f(&shifted(s, i, -h));
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut pp = s.to_vec();
            pp[i] += h;
            pp[j] += h;
            let mut pm = s.to_vec();
            pm[i] += h;
            pm[j] -= h;
            let mut mp = s.to_vec();
            mp[i] -= h;
            mp[j] += h;
            let mut mm = s.to_vec();
            mm[i] -= h;
            mm[j] -= h;
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Central-difference Jacobian of a gradient, symmetrized.
pub fn jacobian_of_gradient(
    g: &dyn Fn(&[f64]) -> DVector<f64>,
    s: &[f64],
    h: f64,
) -> DMatrix<f64> {
    let d = s.len();
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let col = (g(&shifted(s, j, h)) - g(&shifted(s, j, -h))) / (2.0 * h);
        m.set_column(j, &col);
    }
    crate::linalg::symmetrize(&m)
}

/// Which derivative [`finite_diff`] should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Derivative {
    Gradient(DVector<f64>),
    Hessian(DMatrix<f64>),
}

/// Central differences of field values with step `h`.
///
/// When a domain is given, `s` must keep a margin of `2h` from its boundary.
pub fn finite_diff(
    field: &Field,
    s: &[f64],
    h: f64,
    order: DiffOrder,
    domain: Option<&Domain>,
) -> Result<Derivative, FieldError> {
    if h.is_nan() || h <= 0.0 {
        return Err(FieldError::BadStep(h));
    }
    if s.len() != field.dim() {
        return Err(FieldError::Dimension {
            expected: field.dim(),
            got: s.len(),
        });
    }
    if let Some(dom) = domain {
        let distance = dom.signed_distance_inside(s);
        if distance < 2.0 * h {
            return Err(FieldError::Margin {
                distance,
                required: 2.0 * h,
            });
        }
    }
    let f = |x: &[f64]| field.value(x);
    Ok(match order {
        DiffOrder::Gradient => Derivative::Gradient(central_gradient(&f, s, h)),
        DiffOrder::Hessian => Derivative::Hessian(central_hessian(&f, s, h)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle() -> Field {
        Field::new(2, "saddle", Smoothness::C2, |s| s[0] * s[0] - s[1] * s[1])
    }

    #[test]
    fn gradient_of_square_at_one() {
        let f = Field::new(1, "sq", Smoothness::C2, |s| s[0] * s[0]);
        let Derivative::Gradient(g) =
            finite_diff(&f, &[1.0], 1e-4, DiffOrder::Gradient, None).unwrap()
        else {
            panic!()
        };
        assert!((g[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn hessian_of_saddle() {
        let Derivative::Hessian(h) =
            finite_diff(&saddle(), &[0.0, 0.0], 1e-4, DiffOrder::Hessian, None).unwrap()
        else {
            panic!()
        };
        assert!((h[(0, 0)] - 2.0).abs() < 1e-5);
        assert!((h[(1, 1)] + 2.0).abs() < 1e-5);
        assert!(h[(0, 1)].abs() < 1e-5);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
    }

    #[test]
    fn margin_error_near_boundary() {
        let dom = Domain::interval(-1.0, 1.0);
        let f = Field::new(1, "sq", Smoothness::C2, |s| s[0] * s[0]);
        let err = finite_diff(&f, &[1.0 - 1e-5], 1e-4, DiffOrder::Gradient, Some(&dom));
        assert!(matches!(err, Err(FieldError::Margin { .. })));
        assert!(finite_diff(&f, &[0.5], 1e-4, DiffOrder::Gradient, Some(&dom)).is_ok());
    }

    #[test]
    fn rejects_nonpositive_step() {
        let f = saddle();
        assert!(matches!(
            finite_diff(&f, &[0.0, 0.0], 0.0, DiffOrder::Gradient, None),
            Err(FieldError::BadStep(_))
        ));
    }

    #[test]
    fn adapters_compose() {
        let f = saddle().with_linear_term(&[1.0, -2.0]);
        assert_eq!(f.value(&[1.0, 1.0]), 0.0 + 1.0 - 2.0);
        let g = f.negated();
        assert_eq!(g.value(&[1.0, 1.0]), 1.0);
        let q = quadratic(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2), 0.0);
        let s = q.add_scaled(&constant(2, 1.0), 3.0);
        assert_eq!(s.value(&[1.0, 0.0]), 4.0);
        assert!(s.has_analytic_gradient() && s.has_analytic_hessian());
        assert_eq!(s.gradient(&[1.0, 0.0])[0], 2.0);
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let f = saddle();
        let p = [0.3, -0.7];
        assert_eq!(f.gradient(&p), f.gradient(&p));
        assert_eq!(f.hessian(&p), f.hessian(&p));
    }
}
