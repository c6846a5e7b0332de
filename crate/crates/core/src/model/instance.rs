use std::fmt;

use crate::error::{Error, Result};
use crate::model::objective::ObjectiveSpec;

/// Integer variables or continuous variables solved to an accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Integer,
    Continuous,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Integer => "integer",
            Mode::Continuous => "continuous",
        })
    }
}

/// Largest magnitude at which an `f64` still represents every integer.
pub(crate) const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// Minimize `sum_i f_i(x_i)` subject to
///
/// ```text
///   sum_{k <= s[i]} x_k <= a_i     i = 1..m-1
///   sum_k x_k            = B
///   lower_i <= x_i <= upper_i
/// ```
///
/// Breakpoints `s` are 1-based and end at `n`; `a` holds the `m - 1` interior
/// bounds. Fields are public; every solver calls [`NestedInstance::validate`]
/// before touching the data.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedInstance {
    pub n: usize,
    pub m: usize,
    pub s: Vec<usize>,
    pub a: Vec<f64>,
    pub b: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: ObjectiveSpec,
    pub mode: Mode,
}

impl NestedInstance {
    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n, self.m);
        if n == 0 {
            return Err(Error::invalid("n", "n must be at least 1"));
        }
        if m == 0 || m > n {
            return Err(Error::invalid("m", format!("need 1 <= m <= n, got m = {m}, n = {n}")));
        }
        if self.s.len() != m {
            return Err(Error::invalid("s", format!("expected {m} breakpoints, got {}", self.s.len())));
        }
        let mut prev = 0;
        for (i, &si) in self.s.iter().enumerate() {
            if si <= prev {
                return Err(Error::invalid(
                    "s",
                    format!("breakpoints must be strictly increasing from 1 (s[{i}] = {si})"),
                ));
            }
            prev = si;
        }
        if prev != n {
            return Err(Error::invalid("s", format!("last breakpoint must equal n = {n}, got {prev}")));
        }

        if self.a.len() != m - 1 {
            return Err(Error::invalid("a", format!("expected {} bounds, got {}", m - 1, self.a.len())));
        }
        for (i, &ai) in self.a.iter().enumerate() {
            if !ai.is_finite() || ai < 0.0 {
                return Err(Error::invalid("a", format!("a[{i}] = {ai} must be finite and >= 0")));
            }
            if i > 0 && ai < self.a[i - 1] {
                return Err(Error::invalid("a", format!("bounds must be nondecreasing (a[{i}] = {ai})")));
            }
        }
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(Error::invalid("B", format!("B = {} must be finite and >= 0", self.b)));
        }

        if self.lower.len() != n {
            return Err(Error::invalid("lower", format!("expected {n} values, got {}", self.lower.len())));
        }
        if self.upper.len() != n {
            return Err(Error::invalid("upper", format!("expected {n} values, got {}", self.upper.len())));
        }
        let positive = self.objective.needs_positive_domain();
        for i in 0..n {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !lo.is_finite() || lo < 0.0 {
                return Err(Error::invalid("lower", format!("lower[{i}] = {lo} must be finite and >= 0")));
            }
            if positive && lo <= 0.0 {
                return Err(Error::invalid(
                    "lower",
                    format!("{} objective needs lower[{i}] > 0", self.objective.family()),
                ));
            }
            if !hi.is_finite() || hi < lo {
                return Err(Error::invalid("upper", format!("upper[{i}] = {hi} must be finite and >= lower")));
            }
        }

        if self.objective.len() != n {
            return Err(Error::invalid(
                "objective",
                format!("parameters describe {} variables, expected {n}", self.objective.len()),
            ));
        }
        self.validate_params()?;

        if self.mode == Mode::Integer {
            check_integral("a", &self.a)?;
            check_integral("B", std::slice::from_ref(&self.b))?;
            check_integral("lower", &self.lower)?;
            check_integral("upper", &self.upper)?;
        }
        Ok(())
    }

    fn validate_params(&self) -> Result<()> {
        let nonneg = |field: &'static str, v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                Some(i) => Err(Error::invalid(field, format!("{field}[{i}] = {} must be finite and >= 0", v[i]))),
                None => Ok(()),
            }
        };
        let finite = |field: &'static str, v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !x.is_finite()) {
                Some(i) => Err(Error::invalid(field, format!("{field}[{i}] is not finite"))),
                None => Ok(()),
            }
        };
        match &self.objective {
            ObjectiveSpec::F { p, .. } => finite("p", p),
            ObjectiveSpec::Crashing { k, p } => {
                finite("k", k)?;
                nonneg("p", p)
            }
            ObjectiveSpec::FuelOpt { p, c } => {
                nonneg("p", p)?;
                nonneg("c", c)
            }
            ObjectiveSpec::Quadratic { w, t } => {
                nonneg("w", w)?;
                finite("t", t)
            }
            ObjectiveSpec::Custom(_) => Ok(()),
        }
    }

    /// 0-based variable range `[start, end)` of block `v` (1-based).
    #[inline]
    pub fn block(&self, v: usize) -> (usize, usize) {
        let start = if v <= 1 { 0 } else { self.s[v - 2] };
        (start, self.s[v - 1])
    }

    /// `f_i(x)` restricted to the box `[lower_i, upper_i]`.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.n || x < self.lower[i] || x > self.upper[i] {
            return Err(Error::Domain { index: i, x });
        }
        self.objective.eval(i, x)
    }

    /// Total cost of an allocation.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(i, &xi)| self.objective.value(i, xi)).sum()
    }

    /// Prefix sums `y_i = sum_{k <= s[i]} x_k` for `i = 1..m`.
    pub fn prefix_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m);
        let mut acc = 0.0;
        let mut k = 0;
        for &si in &self.s {
            while k < si {
                acc += x[k];
                k += 1;
            }
            out.push(acc);
        }
        out
    }
}

fn check_integral(field: &'static str, values: &[f64]) -> Result<()> {
    for &value in values {
        if value.fract() != 0.0 || value.abs() > MAX_EXACT_INT {
            return Err(Error::NonInteger { field, value });
        }
    }
    Ok(())
}
