//! Separable convex objective families.
//!
//! Every family exposes three things to the solvers: the value oracle
//! `f_i(x)`, the derivative `f'_i(x)`, and the clamped inverse derivative
//! used by the Lagrangian search. The inverse is closed-form for the built-in
//! families and falls back to bisection on `f'_i` for custom objectives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Per-variable callback `(index, x) -> value`.
pub type ScalarFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

/// The family tag of an [`ObjectiveSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    F,
    Crashing,
    FuelOpt,
    Quadratic,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::F => "f",
            Family::Crashing => "crashing",
            Family::FuelOpt => "fuelopt",
            Family::Quadratic => "quadratic",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Externally supplied objective. Only usable in continuous mode when a
/// derivative callback is present.
#[derive(Clone)]
pub struct CustomObjective {
    len: usize,
    value: Arc<ScalarFn>,
    derivative: Option<Arc<ScalarFn>>,
}

impl CustomObjective {
    pub fn new<F>(len: usize, value: F) -> Self
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            len,
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }
}

impl fmt::Debug for CustomObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomObjective")
            .field("len", &self.len)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl PartialEq for CustomObjective {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len
            && Arc::ptr_eq(&self.value, &other.value)
            && match (&self.derivative, &other.derivative) {
                (Some(a), Some(b)) => Arc::ptr_eq(a, b),
                (None, None) => true,
                _ => false,
            }
    }
}

/// Objective `sum_i f_i(x_i)` with per-variable parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    /// `f_i(x) = x^4/4 + p_i x`. With `reflect`, the function is applied to
    /// `1 - x`, which turns lower-bounded prefix constraints into the
    /// upper-bounded form.
    F { p: Vec<f64>, reflect: bool },
    /// `f_i(x) = k_i + p_i / x` on `x > 0`.
    Crashing { k: Vec<f64>, p: Vec<f64> },
    /// `f_i(x) = p_i c_i (c_i / x)^3` on `x > 0`.
    FuelOpt { p: Vec<f64>, c: Vec<f64> },
    /// `f_i(x) = w_i (x - t_i)^2`.
    Quadratic { w: Vec<f64>, t: Vec<f64> },
    Custom(CustomObjective),
}

impl ObjectiveSpec {
    pub fn family(&self) -> Family {
        match self {
            ObjectiveSpec::F { .. } => Family::F,
            ObjectiveSpec::Crashing { .. } => Family::Crashing,
            ObjectiveSpec::FuelOpt { .. } => Family::FuelOpt,
            ObjectiveSpec::Quadratic { .. } => Family::Quadratic,
            ObjectiveSpec::Custom(_) => Family::Custom,
        }
    }

    /// Number of variables the parameter arrays describe.
    pub fn len(&self) -> usize {
        match self {
            ObjectiveSpec::F { p, .. } => p.len(),
            ObjectiveSpec::Crashing { p, k } => p.len().min(k.len()),
            ObjectiveSpec::FuelOpt { p, c } => p.len().min(c.len()),
            ObjectiveSpec::Quadratic { w, t } => w.len().min(t.len()),
            ObjectiveSpec::Custom(c) => c.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_derivative(&self) -> bool {
        match self {
            ObjectiveSpec::Custom(c) => c.derivative.is_some(),
            _ => true,
        }
    }

    /// Families with a pole at zero need strictly positive lower bounds.
    pub fn needs_positive_domain(&self) -> bool {
        matches!(
            self,
            ObjectiveSpec::Crashing { .. } | ObjectiveSpec::FuelOpt { .. }
        )
    }

    /// Raw value oracle, no domain check.
    #[inline]
    pub fn value(&self, i: usize, x: f64) -> f64 {
        match self {
            ObjectiveSpec::F { p, reflect } => {
                let u = if *reflect { 1.0 - x } else { x };
                let u2 = u * u;
                0.25 * u2 * u2 + p[i] * u
            }
            ObjectiveSpec::Crashing { k, p } => k[i] + p[i] / x,
            ObjectiveSpec::FuelOpt { p, c } => {
                let r = c[i] / x;
                p[i] * c[i] * r * r * r
            }
            ObjectiveSpec::Quadratic { w, t } => {
                let d = x - t[i];
                w[i] * d * d
            }
            ObjectiveSpec::Custom(c) => (c.value)(i, x),
        }
    }

    fn check_domain(&self, i: usize, x: f64) -> Result<()> {
        if i >= self.len() || !x.is_finite() || (self.needs_positive_domain() && x <= 0.0) {
            return Err(Error::Domain { index: i, x });
        }
        Ok(())
    }

    /// `f_i(x)`, rejecting points outside the family's natural domain.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.check_domain(i, x)?;
        Ok(self.value(i, x))
    }

    /// `f'_i(x)`.
    pub fn derivative(&self, i: usize, x: f64) -> Result<f64> {
        self.check_domain(i, x)?;
        if !self.has_derivative() {
            return Err(Error::MissingDerivative);
        }
        Ok(self.slope(i, x))
    }

    /// Derivative without checks. Custom objectives without a derivative
    /// yield NaN.
    #[inline]
    pub(crate) fn slope(&self, i: usize, x: f64) -> f64 {
        match self {
            ObjectiveSpec::F { p, reflect } => {
                if *reflect {
                    let u = 1.0 - x;
                    -(u * u * u + p[i])
                } else {
                    x * x * x + p[i]
                }
            }
            ObjectiveSpec::Crashing { p, .. } => -p[i] / (x * x),
            ObjectiveSpec::FuelOpt { p, c } => {
                let c2 = c[i] * c[i];
                let x2 = x * x;
                -3.0 * p[i] * c2 * c2 / (x2 * x2)
            }
            ObjectiveSpec::Quadratic { w, t } => 2.0 * w[i] * (x - t[i]),
            ObjectiveSpec::Custom(c) => match &c.derivative {
                Some(d) => d(i, x),
                None => f64::NAN,
            },
        }
    }

    /// Largest `x` in `[lo, hi]` with `f'_i(x) <= lambda`, or `lo` when no
    /// such point exists.
    #[inline]
    pub(crate) fn inverse_slope(&self, i: usize, lambda: f64, lo: f64, hi: f64) -> f64 {
        let raw = match self {
            ObjectiveSpec::F { p, reflect } => {
                if *reflect {
                    1.0 - (-lambda - p[i]).cbrt()
                } else {
                    (lambda - p[i]).cbrt()
                }
            }
            ObjectiveSpec::Crashing { p, .. } => pole_inverse(lambda, p[i], 2),
            ObjectiveSpec::FuelOpt { p, c } => {
                let c2 = c[i] * c[i];
                pole_inverse(lambda, 3.0 * p[i] * c2 * c2, 4)
            }
            ObjectiveSpec::Quadratic { w, t } => {
                if w[i] > 0.0 {
                    t[i] + lambda / (2.0 * w[i])
                } else if lambda >= 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            ObjectiveSpec::Custom(_) => return self.inverse_by_bisection(i, lambda, lo, hi),
        };
        raw.max(lo).min(hi)
    }

    fn inverse_by_bisection(&self, i: usize, lambda: f64, lo: f64, hi: f64) -> f64 {
        if self.slope(i, hi) <= lambda {
            return hi;
        }
        if !(self.slope(i, lo) <= lambda) {
            return lo;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = a + 0.5 * (b - a);
            if mid <= a || mid >= b {
                break;
            }
            if self.slope(i, mid) <= lambda {
                a = mid;
            } else {
                b = mid;
            }
        }
        a
    }

    /// Upper bound on `|f''_i|` over `[lo, hi]`. `None` for custom objectives.
    pub fn curvature_bound(&self, i: usize, lo: f64, hi: f64) -> Option<f64> {
        let v = match self {
            ObjectiveSpec::F { reflect, .. } => {
                let (a, b) = if *reflect { (1.0 - hi, 1.0 - lo) } else { (lo, hi) };
                3.0 * (a * a).max(b * b)
            }
            ObjectiveSpec::Crashing { p, .. } => 2.0 * p[i] / (lo * lo * lo),
            ObjectiveSpec::FuelOpt { p, c } => {
                let c2 = c[i] * c[i];
                let lo2 = lo * lo;
                12.0 * p[i] * c2 * c2 / (lo2 * lo2 * lo)
            }
            ObjectiveSpec::Quadratic { w, .. } => 2.0 * w[i],
            ObjectiveSpec::Custom(_) => return None,
        };
        Some(v.abs())
    }
}

/// Inverse of `x -> -q / x^k` on `x > 0`.
#[inline]
fn pole_inverse(lambda: f64, q: f64, k: i32) -> f64 {
    if lambda >= 0.0 {
        return f64::INFINITY;
    }
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let r = q / -lambda;
    match k {
        2 => r.sqrt(),
        4 => r.sqrt().sqrt(),
        _ => r.powf(1.0 / k as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: f64) -> ObjectiveSpec {
        ObjectiveSpec::F { p: vec![p], reflect: false }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(f(0.0).eval(0, 2.0).unwrap(), 4.0);
        let crash = ObjectiveSpec::Crashing { k: vec![1.0], p: vec![2.0] };
        assert_eq!(crash.eval(0, 2.0).unwrap(), 2.0);
        let fuel = ObjectiveSpec::FuelOpt { p: vec![1.0], c: vec![1.0] };
        assert_eq!(fuel.eval(0, 2.0).unwrap(), 0.125);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(f(1.0).derivative(0, 1.0).unwrap(), 2.0);
        let quad = ObjectiveSpec::Quadratic { w: vec![1.0], t: vec![0.0] };
        assert_eq!(quad.derivative(0, 3.0).unwrap(), 6.0);
        let crash = ObjectiveSpec::Crashing { k: vec![0.0], p: vec![4.0] };
        assert_eq!(crash.derivative(0, 2.0).unwrap(), -1.0);
    }

    #[test]
    fn pole_families_reject_nonpositive_x() {
        let crash = ObjectiveSpec::Crashing { k: vec![0.0], p: vec![1.0] };
        assert!(matches!(crash.eval(0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(crash.derivative(0, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn custom_without_derivative() {
        let c = ObjectiveSpec::Custom(CustomObjective::new(2, |_, x| x * x));
        assert_eq!(c.eval(1, 3.0).unwrap(), 9.0);
        assert!(matches!(c.derivative(0, 1.0), Err(Error::MissingDerivative)));
        assert!(!c.has_derivative());
    }

    #[test]
    fn reflected_f_mirrors_about_one() {
        let r = ObjectiveSpec::F { p: vec![0.3], reflect: true };
        let d = f(0.3);
        for &x in &[0.0, 0.2, 0.75, 1.0] {
            assert!((r.value(0, x) - d.value(0, 1.0 - x)).abs() < 1e-15);
            assert!((r.slope(0, x) + d.slope(0, 1.0 - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_matches_derivative() {
        let specs = vec![
            f(0.4),
            ObjectiveSpec::F { p: vec![0.4], reflect: true },
            ObjectiveSpec::Crashing { k: vec![0.0], p: vec![1.7] },
            ObjectiveSpec::FuelOpt { p: vec![1.1], c: vec![0.8] },
            ObjectiveSpec::Quadratic { w: vec![2.0], t: vec![0.3] },
            ObjectiveSpec::Custom(
                CustomObjective::new(1, |_, x| x.powi(4)).with_derivative(|_, x| 4.0 * x.powi(3)),
            ),
        ];
        for spec in specs {
            for &x in &[0.3, 0.5, 0.9] {
                let lambda = spec.slope(0, x);
                let back = spec.inverse_slope(0, lambda, 0.1, 1.0);
                assert!((back - x).abs() < 1e-9, "{:?} at {x}: {back}", spec.family());
            }
            // clamping at both ends
            assert_eq!(spec.inverse_slope(0, spec.slope(0, 0.05), 0.1, 1.0), 0.1);
            assert_eq!(spec.inverse_slope(0, spec.slope(0, 1.0) + 1.0, 0.1, 1.0), 1.0);
        }
    }
}
