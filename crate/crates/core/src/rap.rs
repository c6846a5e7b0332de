//! Box-constrained resource allocation with a single equality:
//!
//! ```text
//!   min sum_i f_i(x_i)   s.t.  sum_i x_i = R,  lower_i <= x_i <= upper_i
//! ```
//!
//! Continuous problems are solved by bisection on the Lagrange multiplier
//! `lambda`, where each coordinate is `clamp((f'_i)^-1(lambda))`. Integer
//! problems use the same idea over marginal costs `f_i(t) - f_i(t-1)`: the
//! multiplier is bisected over the totally ordered bit patterns of `f64`, so
//! the search ends on the exact critical marginal. A heap-based greedy kernel
//! is kept as the reference for small targets.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::model::instance::MAX_EXACT_INT;
use crate::model::objective::ObjectiveSpec;

const MAX_BISECTIONS: usize = 300;

/// One resource-allocation subproblem over a contiguous range of variables.
///
/// The kernel works on shifted variables `z`, with `x = shift + z` passed to
/// the objective. `lower`/`upper` bound `z`.
#[derive(Debug, Clone, Copy)]
pub struct RapProblem<'a> {
    pub objective: &'a ObjectiveSpec,
    /// Position of the first variable in the objective's parameter arrays.
    pub offset: usize,
    pub shift: Option<&'a [f64]>,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub target: f64,
}

impl<'a> RapProblem<'a> {
    pub fn new(objective: &'a ObjectiveSpec, lower: &'a [f64], upper: &'a [f64], target: f64) -> Self {
        RapProblem {
            objective,
            offset: 0,
            shift: None,
            lower,
            upper,
            target,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    #[inline]
    fn shift_at(&self, j: usize) -> f64 {
        self.shift.map_or(0.0, |s| s[j])
    }

    /// `f` at shifted coordinate `z` of local variable `j`.
    #[inline]
    fn value(&self, j: usize, z: f64) -> f64 {
        self.objective.value(self.offset + j, self.shift_at(j) + z)
    }

    #[inline]
    fn slope(&self, j: usize, z: f64) -> f64 {
        self.objective.slope(self.offset + j, self.shift_at(j) + z)
    }

    /// Clamped inverse derivative in shifted coordinates. Clamped values are
    /// returned bit-exact.
    #[inline]
    fn z_at(&self, j: usize, lambda: f64) -> f64 {
        let (c, d) = (self.lower[j], self.upper[j]);
        let sh = self.shift_at(j);
        let x = self.objective.inverse_slope(self.offset + j, lambda, sh + c, sh + d);
        if x >= sh + d {
            d
        } else if x <= sh + c {
            c
        } else {
            (x - sh).max(c).min(d)
        }
    }

    fn bound_sums(&self) -> (f64, f64) {
        (self.lower.iter().sum(), self.upper.iter().sum())
    }
}

/// Multiplier interval with the allocations it brackets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBracket {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub sum_lo: f64,
    pub sum_hi: f64,
}

/// `[min_i f'_i(lower_i), max_i f'_i(upper_i)]`, the starting interval of the
/// continuous search.
pub fn initial_bracket(p: &RapProblem<'_>) -> Result<LambdaBracket> {
    let mut lambda_lo = f64::INFINITY;
    let mut lambda_hi = f64::NEG_INFINITY;
    for j in 0..p.len() {
        let lo = p.slope(j, p.lower[j]);
        let hi = p.slope(j, p.upper[j]);
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::NotANumber { index: p.offset + j });
        }
        lambda_lo = lambda_lo.min(lo);
        lambda_hi = lambda_hi.max(hi);
    }
    let (sum_lo, sum_hi) = p.bound_sums();
    Ok(LambdaBracket {
        lambda_lo,
        lambda_hi,
        sum_lo,
        sum_hi,
    })
}

/// What a continuous solve did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RapReport {
    pub iterations: usize,
    /// Final bracket; `None` when the answer was forced by the bounds.
    pub bracket: Option<LambdaBracket>,
}

/// Reusable buffers for [`rap_continuous_into`].
#[derive(Debug, Default)]
pub struct RapScratch {
    lo: Vec<f64>,
    hi: Vec<f64>,
    mid: Vec<f64>,
}

fn feasibility(p: &RapProblem<'_>, sum_lo: f64, sum_hi: f64) -> Result<()> {
    let scale = 1f64.max(sum_lo.abs()).max(sum_hi.abs()).max(p.target.abs());
    let tol = 1e-9 * scale;
    if !p.target.is_finite() || p.target < sum_lo - tol || p.target > sum_hi + tol {
        return Err(Error::InfeasibleSubproblem {
            target: p.target,
            min: sum_lo,
            max: sum_hi,
        });
    }
    Ok(())
}

/// Solve a continuous subproblem so that every coordinate is within `eps` of
/// the exact clamped-KKT point.
pub fn rap_continuous(p: &RapProblem<'_>, eps: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; p.len()];
    rap_continuous_into(p, eps, &mut out, &mut RapScratch::default())?;
    Ok(out)
}

/// [`rap_continuous`] writing into `out` (length `p.len()`).
pub fn rap_continuous_into(
    p: &RapProblem<'_>,
    eps: f64,
    out: &mut [f64],
    scratch: &mut RapScratch,
) -> Result<RapReport> {
    let k = p.len();
    debug_assert_eq!(out.len(), k);
    let (sum_c, sum_d) = p.bound_sums();
    feasibility(p, sum_c, sum_d)?;
    if !p.objective.has_derivative() {
        return Err(Error::MissingDerivative);
    }
    let target = p.target;
    let forced = RapReport {
        iterations: 0,
        bracket: None,
    };
    if target <= sum_c {
        out.copy_from_slice(p.lower);
        return Ok(forced);
    }
    if target >= sum_d {
        out.copy_from_slice(p.upper);
        return Ok(forced);
    }
    if k == 1 {
        out[0] = target;
        return Ok(forced);
    }

    let mut bracket = initial_bracket(p)?;
    if !(bracket.lambda_lo < bracket.lambda_hi) {
        // f' is the same constant on every box: any feasible point is optimal
        water_fill(p.lower, p.upper, target, out);
        return Ok(RapReport {
            iterations: 0,
            bracket: Some(bracket),
        });
    }

    let RapScratch { lo, hi, mid } = scratch;
    lo.clear();
    lo.extend_from_slice(p.lower);
    hi.clear();
    hi.extend_from_slice(p.upper);
    mid.resize(k, 0.0);

    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let lambda = bracket.lambda_lo + 0.5 * (bracket.lambda_hi - bracket.lambda_lo);
        if lambda <= bracket.lambda_lo || lambda >= bracket.lambda_hi {
            break;
        }
        iterations += 1;
        let mut sum = 0.0;
        for (j, z) in mid.iter_mut().enumerate() {
            *z = p.z_at(j, lambda);
            sum += *z;
        }
        if sum == target {
            out.copy_from_slice(mid);
            bracket.lambda_lo = lambda;
            bracket.lambda_hi = lambda;
            bracket.sum_lo = sum;
            bracket.sum_hi = sum;
            return Ok(RapReport {
                iterations,
                bracket: Some(bracket),
            });
        }
        if sum < target {
            bracket.lambda_lo = lambda;
            bracket.sum_lo = sum;
            std::mem::swap(lo, mid);
        } else {
            bracket.lambda_hi = lambda;
            bracket.sum_hi = sum;
            std::mem::swap(hi, mid);
        }
        let width = lo.iter().zip(hi.iter()).fold(0.0f64, |w, (a, b)| w.max(b - a));
        if width <= eps {
            converged = true;
            break;
        }
    }

    if converged {
        // every coordinate is pinned to an interval of width <= eps; the
        // secant point between the two ends keeps the sum exact
        let gap = bracket.sum_hi - bracket.sum_lo;
        let theta = if gap > 0.0 {
            ((target - bracket.sum_lo) / gap).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for ((o, a), b) in out.iter_mut().zip(lo.iter()).zip(hi.iter()) {
            *o = a + theta * (b - a);
        }
    } else {
        // multiplier cannot be refined further: the remaining spread sits on
        // flat stretches of f', filled in index order
        let mut residual = target - bracket.sum_lo;
        for ((o, a), b) in out.iter_mut().zip(lo.iter()).zip(hi.iter()) {
            let add = residual.min(b - a).max(0.0);
            *o = a + add;
            residual -= add;
        }
    }
    Ok(RapReport {
        iterations,
        bracket: Some(bracket),
    })
}

/// `lower` plus an even share of the residual, capped by each box.
fn water_fill(lower: &[f64], upper: &[f64], target: f64, out: &mut [f64]) {
    let mut order: Vec<usize> = (0..lower.len()).collect();
    order.sort_by(|&i, &j| (upper[i] - lower[i]).total_cmp(&(upper[j] - lower[j])).then(i.cmp(&j)));
    let mut residual = target - lower.iter().sum::<f64>();
    let mut left = order.len();
    for i in order {
        let give = (residual / left as f64).min(upper[i] - lower[i]).max(0.0);
        out[i] = lower[i] + give;
        residual -= give;
        left -= 1;
    }
}

/// Integer view of a subproblem.
struct IntRap<'p, 'a> {
    p: &'p RapProblem<'a>,
    lower: Vec<i64>,
    upper: Vec<i64>,
    target: i64,
}

fn to_int(field: &'static str, value: f64) -> Result<i64> {
    if value.fract() != 0.0 || value.abs() > MAX_EXACT_INT {
        return Err(Error::NonInteger { field, value });
    }
    Ok(value as i64)
}

impl<'p, 'a> IntRap<'p, 'a> {
    fn new(p: &'p RapProblem<'a>) -> Result<Self> {
        let lower = p.lower.iter().map(|&v| to_int("lower", v)).collect::<Result<Vec<_>>>()?;
        let upper = p.upper.iter().map(|&v| to_int("upper", v)).collect::<Result<Vec<_>>>()?;
        let target = to_int("target", p.target)?;
        let sum_lo: i64 = lower.iter().sum();
        let sum_hi: i64 = upper.iter().sum();
        if target < sum_lo || target > sum_hi || lower.iter().zip(&upper).any(|(c, d)| c > d) {
            return Err(Error::InfeasibleSubproblem {
                target: p.target,
                min: sum_lo as f64,
                max: sum_hi as f64,
            });
        }
        Ok(IntRap { p, lower, upper, target })
    }

    /// Cost of raising local variable `j` from `t - 1` to `t`.
    #[inline]
    fn marginal(&self, j: usize, t: i64) -> f64 {
        self.p.value(j, t as f64) - self.p.value(j, (t - 1) as f64)
    }

    /// Largest `t` in `[lower_j, upper_j]` whose marginal is `<= lambda`.
    fn level(&self, j: usize, lambda: f64) -> i64 {
        let (mut lo, mut hi) = (self.lower[j], self.upper[j]);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if self.marginal(j, mid) <= lambda {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    fn total(&self, lambda: f64) -> i64 {
        (0..self.lower.len()).map(|j| self.level(j, lambda)).sum()
    }
}

/// Order-preserving map from `f64` to `i64` (the `total_cmp` order).
#[inline]
fn ord_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    bits ^ (((bits >> 63) as u64) >> 1) as i64
}

#[inline]
fn from_key(key: i64) -> f64 {
    f64::from_bits((key ^ (((key >> 63) as u64) >> 1) as i64) as u64)
}

/// Exact integer optimum. Ties at the critical marginal go to the lowest
/// index first.
pub fn rap_integer(p: &RapProblem<'_>) -> Result<Vec<i64>> {
    let int = IntRap::new(p)?;
    solve_int(&int)
}

pub(crate) fn rap_integer_into(p: &RapProblem<'_>, out: &mut [f64]) -> Result<()> {
    let int = IntRap::new(p)?;
    for (o, v) in out.iter_mut().zip(solve_int(&int)?) {
        *o = v as f64;
    }
    Ok(())
}

fn solve_int(int: &IntRap<'_, '_>) -> Result<Vec<i64>> {
    let k = int.lower.len();
    let sum_lo: i64 = int.lower.iter().sum();
    if int.target == sum_lo {
        return Ok(int.lower.clone());
    }
    if int.target == int.upper.iter().sum::<i64>() {
        return Ok(int.upper.clone());
    }

    let mut min_marginal = f64::INFINITY;
    let mut max_marginal = f64::NEG_INFINITY;
    for j in 0..k {
        if int.upper[j] > int.lower[j] {
            let first = int.marginal(j, int.lower[j] + 1);
            let last = int.marginal(j, int.upper[j]);
            if first.is_nan() || last.is_nan() {
                return Err(Error::NotANumber { index: int.p.offset + j });
            }
            min_marginal = min_marginal.min(first);
            max_marginal = max_marginal.max(last);
        }
    }

    // invariant: total(lo) < target <= total(hi)
    // keys of opposite sign can be more than i64::MAX apart
    let mut lo = i128::from(ord_key(min_marginal)) - 1;
    let mut hi = i128::from(ord_key(max_marginal));
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if int.total(from_key(mid as i64)) < int.target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let below = if lo < i128::from(i64::MIN) { f64::NEG_INFINITY } else { from_key(lo as i64) };
    let critical = from_key(hi as i64);
    let mut x: Vec<i64> = (0..k).map(|j| int.level(j, below)).collect();
    let mut residual = int.target - x.iter().sum::<i64>();
    for (j, xj) in x.iter_mut().enumerate() {
        if residual == 0 {
            break;
        }
        let add = (int.level(j, critical) - *xj).min(residual);
        *xj += add;
        residual -= add;
    }
    debug_assert_eq!(residual, 0);
    Ok(x)
}

/// Unit-increment greedy: repeatedly raise the variable with the cheapest
/// next marginal (lowest index on ties). `O((R - sum lower) log n)`.
pub fn rap_integer_greedy(p: &RapProblem<'_>) -> Result<Vec<i64>> {
    let int = IntRap::new(p)?;
    let mut x = int.lower.clone();
    let mut residual = int.target - x.iter().sum::<i64>();
    let mut heap = BinaryHeap::new();
    for j in 0..x.len() {
        if x[j] < int.upper[j] {
            heap.push(Reverse((OrderedFloat(int.marginal(j, x[j] + 1)), j)));
        }
    }
    while residual > 0 {
        let Some(Reverse((_, j))) = heap.pop() else {
            unreachable!("target checked against the upper bounds");
        };
        x[j] += 1;
        residual -= 1;
        if x[j] < int.upper[j] {
            heap.push(Reverse((OrderedFloat(int.marginal(j, x[j] + 1)), j)));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares(n: usize) -> ObjectiveSpec {
        ObjectiveSpec::Quadratic { w: vec![1.0; n], t: vec![0.0; n] }
    }

    #[test]
    fn symmetric_split() {
        let obj = squares(3);
        let x = rap_continuous(&RapProblem::new(&obj, &[0.0; 3], &[10.0; 3], 6.0), 1e-10).unwrap();
        for v in x {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bounds_force_the_answer() {
        let obj = ObjectiveSpec::F { p: vec![0.0, 0.0], reflect: false };
        let x = rap_continuous(&RapProblem::new(&obj, &[0.0; 2], &[1.0; 2], 2.0), 1e-10).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn clamped_coordinate() {
        // frozen from a 1e-3 grid over x1 in [0,1] with x2 = 4 - x1
        let obj = squares(2);
        let x = rap_continuous(&RapProblem::new(&obj, &[0.0; 2], &[1.0, 10.0], 4.0), 1e-10).unwrap();
        assert_eq!(x[0], 1.0);
        assert!((x[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_target() {
        let obj = squares(2);
        let p = RapProblem::new(&obj, &[0.0; 2], &[1.0; 2], 3.0);
        assert!(matches!(rap_continuous(&p, 1e-8), Err(Error::InfeasibleSubproblem { .. })));
        assert!(matches!(rap_integer(&p), Err(Error::InfeasibleSubproblem { .. })));
    }

    #[test]
    fn flat_objective_uses_water_fill() {
        let obj = ObjectiveSpec::Quadratic { w: vec![0.0; 3], t: vec![0.0; 3] };
        let x = rap_continuous(&RapProblem::new(&obj, &[0.0; 3], &[1.0, 5.0, 5.0], 5.0), 1e-8).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 2.0]);
    }

    #[test]
    fn partially_flat_objective_fills_in_index_order() {
        // two linear pieces with slope 0 and one strictly convex term whose
        // optimum is pinned at 0.5 by the same multiplier
        let obj = ObjectiveSpec::Quadratic { w: vec![0.0, 1.0, 0.0], t: vec![0.0, 0.5, 0.0] };
        let x = rap_continuous(&RapProblem::new(&obj, &[0.0; 3], &[2.0; 3], 3.0), 1e-9).unwrap();
        assert!((x.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!((x[1] - 0.5).abs() < 1e-6, "{x:?}");
        assert!(x[0] >= x[2]);
    }

    #[test]
    fn shift_moves_evaluation_point() {
        // f(x) = x^2 evaluated at 1 + z: z = (1, 3) - 1
        let obj = squares(2);
        let shift = [1.0, 1.0];
        let p = RapProblem {
            shift: Some(&shift),
            ..RapProblem::new(&obj, &[0.0; 2], &[0.0, 9.0], 2.0)
        };
        let x = rap_continuous(&p, 1e-10).unwrap();
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-10);
    }

    // integer examples, expected values frozen from enumerating every split
    fn linear_and_square() -> ObjectiveSpec {
        ObjectiveSpec::Custom(crate::model::CustomObjective::new(2, |i, x| if i == 0 { x * x } else { 3.0 * x }))
    }

    fn cost(obj: &ObjectiveSpec, x: &[i64]) -> f64 {
        x.iter().enumerate().map(|(i, &v)| obj.value(i, v as f64)).sum()
    }

    #[test]
    fn integer_examples() {
        let obj = linear_and_square();
        let p = RapProblem::new(&obj, &[0.0; 2], &[4.0; 2], 4.0);
        let x = rap_integer(&p).unwrap();
        assert_eq!(x, vec![2, 2]);
        assert_eq!(cost(&obj, &x), 10.0);
        assert_eq!(rap_integer_greedy(&p).unwrap(), x);

        let sq = squares(3);
        let p = RapProblem::new(&sq, &[0.0; 3], &[10.0; 3], 7.0);
        let x = rap_integer(&p).unwrap();
        assert_eq!(cost(&sq, &x), 17.0);
        assert_eq!(x, vec![3, 2, 2]);
        assert_eq!(rap_integer_greedy(&p).unwrap(), x);

        let p = RapProblem::new(&sq, &[1.0, 2.0, 0.0], &[10.0; 3], 3.0);
        assert_eq!(rap_integer(&p).unwrap(), vec![1, 2, 0]);
        assert_eq!(rap_integer_greedy(&p).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn integer_tie_break_lowest_index() {
        let sq = squares(2);
        let p = RapProblem::new(&sq, &[0.0; 2], &[10.0; 2], 3.0);
        assert_eq!(rap_integer(&p).unwrap(), vec![2, 1]);
        assert_eq!(rap_integer_greedy(&p).unwrap(), vec![2, 1]);

        let one = squares(1);
        let p = RapProblem::new(&one, &[0.0], &[5.0], 5.0);
        assert_eq!(rap_integer(&p).unwrap(), vec![5]);
        assert_eq!(rap_integer_greedy(&p).unwrap(), vec![5]);
    }

    #[test]
    fn integer_rejects_fractions() {
        let sq = squares(2);
        let p = RapProblem::new(&sq, &[0.0; 2], &[10.0; 2], 3.5);
        assert!(matches!(rap_integer(&p), Err(Error::NonInteger { field: "target", .. })));
    }

    #[test]
    fn key_roundtrip_and_order() {
        let values = [f64::NEG_INFINITY, -3.5, -0.0, 0.0, 1e-300, 2.0, f64::INFINITY];
        for w in values.windows(2) {
            assert!(ord_key(w[0]) < ord_key(w[1]));
        }
        for v in values {
            assert_eq!(from_key(ord_key(v)).to_bits(), v.to_bits());
        }
    }
}
