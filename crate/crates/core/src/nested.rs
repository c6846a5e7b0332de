//! Divide-and-conquer solver for nested constraints.
//!
//! After tightening the prefix bounds, blocks `v..=w` are solved by splitting
//! at `t = (v + w) / 2`, solving both halves with constraints `v - 1`, `t` and
//! `w` taken as tight, and then solving one subproblem over the union in
//! which the left half may only decrease (`0 <= x_i <= x_left_i`) and the
//! right half may only increase (`x_right_i <= x_i <= d_i`). Those bounds
//! imply every interior nested constraint, so the union is a plain RAP.
//!
//! The recursion tree is walked iteratively in the same post-order as the
//! recursive formulation.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};
use crate::model::solution::{Solution, SolveStats, Status};
use crate::oracles::active::count_tight;
use crate::rap::{rap_continuous_into, rap_integer_into, RapProblem, RapScratch};

/// Per-variable working interval and tightened prefix bounds, in shifted
/// coordinates `z = x - lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `m + 1` entries: `tight[0] = 0`, `tight[m] = B - sum lower`.
    pub tight: Vec<f64>,
}

/// Instance data after the change of variables `z = x - lower`.
#[derive(Debug, Clone)]
struct Shifted {
    /// Box widths `upper - lower`.
    cap: Vec<f64>,
    /// `m + 1` prefix bounds, `bounds[0] = 0`, `bounds[m] = B'`.
    bounds: Vec<f64>,
}

fn shift(inst: &NestedInstance) -> Shifted {
    let cap: Vec<f64> = inst.upper.iter().zip(&inst.lower).map(|(u, l)| u - l).collect();
    let mut bounds = Vec::with_capacity(inst.m + 1);
    bounds.push(0.0);
    let mut acc = 0.0;
    let mut k = 0;
    for (j, &sj) in inst.s.iter().enumerate() {
        while k < sj {
            acc += inst.lower[k];
            k += 1;
        }
        let raw = if j + 1 == inst.m { inst.b } else { inst.a[j] };
        bounds.push(raw - acc);
    }
    // prefix sums of z are nondecreasing, so a later bound caps every
    // earlier one; this also absorbs a_i > B
    for j in (1..inst.m).rev() {
        bounds[j] = bounds[j].min(bounds[j + 1]);
    }
    Shifted { cap, bounds }
}

/// Tighten each prefix bound to what the boxes of its block can reach:
/// `tight_i = min(tight_{i-1} + sum_{block i} d_k, a_i)`.
pub fn tighten(inst: &NestedInstance) -> WorkingBounds {
    let sh = shift(inst);
    let m = inst.m;
    let mut tight = sh.bounds;
    for i in 1..m {
        let (start, end) = inst.block(i);
        let reach: f64 = sh.cap[start..end].iter().sum();
        tight[i] = (tight[i - 1] + reach).min(tight[i]);
    }
    WorkingBounds {
        lower: vec![0.0; inst.n],
        upper: sh.cap,
        tight,
    }
}

/// Whether the tightened instance admits a feasible point: for every block
/// `i`, the boxes from block `i` on must be able to carry `B - tight_{i-1}`.
pub fn check_feasible(inst: &NestedInstance, wb: &WorkingBounds) -> bool {
    let m = inst.m;
    let tight = &wb.tight;
    let total = tight[m];
    // continuous data accumulates round-off in the prefix sums
    let slack = match inst.mode {
        Mode::Integer => 0.0,
        Mode::Continuous => 1e-12 * total.abs().max(1.0),
    };
    if tight.windows(2).any(|w| w[1] < w[0] - slack) {
        return false;
    }
    let mut suffix = 0.0;
    for i in (1..=m).rev() {
        let (start, end) = inst.block(i);
        suffix += wb.upper[start..end].iter().sum::<f64>();
        if suffix + slack < total - tight[i - 1] {
            return false;
        }
    }
    true
}

/// Left-to-right fill of block `v` up to its tightened capacity. Feasible for
/// the block's subproblem whenever the instance passed [`check_feasible`].
pub fn block_fill_point(inst: &NestedInstance, wb: &WorkingBounds, v: usize) -> Vec<f64> {
    let (start, end) = inst.block(v);
    let mut remaining = wb.tight[v] - wb.tight[v - 1];
    wb.upper[start..end]
        .iter()
        .map(|&d| {
            let x = d.min(remaining).max(0.0);
            remaining -= x;
            x
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Max-norm accuracy; required in continuous mode, ignored otherwise.
    pub epsilon: Option<f64>,
    pub time_limit: Option<Duration>,
}

/// Solve with default options and the given accuracy.
pub fn solve(inst: &NestedInstance, epsilon: Option<f64>) -> Result<(Solution, SolveStats)> {
    solve_with(
        inst,
        &SolveOptions {
            epsilon,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(inst: &NestedInstance, opts: &SolveOptions) -> Result<(Solution, SolveStats)> {
    inst.validate()?;
    let epsilon = match inst.mode {
        Mode::Continuous => {
            let eps = opts.epsilon.filter(|e| *e > 0.0 && e.is_finite()).ok_or(Error::MissingEpsilon)?;
            if !inst.objective.has_derivative() {
                return Err(Error::MissingDerivative);
            }
            Some(eps)
        }
        Mode::Integer => None,
    };
    let started = Instant::now();
    let deadline = opts.time_limit.map(|t| started + t);

    let mut wb = tighten(inst);
    if !check_feasible(inst, &wb) {
        let stats = SolveStats {
            wall_ms: elapsed_ms(started),
            ..SolveStats::default()
        };
        return Ok((Solution::infeasible(epsilon), stats));
    }

    let levels = tree_depth(inst.m);
    let sub_eps = epsilon.map(|e| e / levels as f64);
    let mut z = vec![0.0; inst.n];
    let mut scratch = RapScratch::default();
    let mut rap_calls = 0;
    let mut depth_seen = 0;

    enum Step {
        Descend(usize, usize, usize),
        Merge(usize, usize, usize),
    }
    let mut stack = vec![Step::Descend(1, inst.m, 1)];
    while let Some(step) = stack.pop() {
        if let Some(deadline) = deadline {
            if rap_calls % 64 == 0 && Instant::now() > deadline {
                return Err(Error::TimeLimit);
            }
        }
        let (v, w) = match step {
            Step::Descend(v, w, depth) => {
                depth_seen = depth_seen.max(depth);
                if v < w {
                    let t = (v + w) / 2;
                    stack.push(Step::Merge(v, w, t));
                    stack.push(Step::Descend(t + 1, w, depth + 1));
                    stack.push(Step::Descend(v, t, depth + 1));
                    continue;
                }
                (v, w)
            }
            Step::Merge(v, w, t) => {
                let (start, mid) = (inst.block(v).0, inst.block(t).1);
                let end = inst.block(w).1;
                wb.lower[start..mid].fill(0.0);
                wb.upper[start..mid].copy_from_slice(&z[start..mid]);
                wb.lower[mid..end].copy_from_slice(&z[mid..end]);
                // right-hand upper bounds still hold the original widths
                (v, w)
            }
        };
        let (start, end) = (inst.block(v).0, inst.block(w).1);
        let problem = RapProblem {
            objective: &inst.objective,
            offset: start,
            shift: Some(&inst.lower[start..end]),
            lower: &wb.lower[start..end],
            upper: &wb.upper[start..end],
            target: wb.tight[w] - wb.tight[v - 1],
        };
        match sub_eps {
            Some(eps) => {
                rap_continuous_into(&problem, eps, &mut z[start..end], &mut scratch)?;
            }
            None => rap_integer_into(&problem, &mut z[start..end])?,
        }
        if cfg!(debug_assertions) && v < w {
            for i in start..end {
                debug_assert!(z[i] >= wb.lower[i] && z[i] <= wb.upper[i]);
            }
        }
        rap_calls += 1;
        // restore the original widths before this range is merged again
        if v < w {
            let mid = inst.block((v + w) / 2).1;
            for i in start..mid {
                wb.upper[i] = inst.upper[i] - inst.lower[i];
            }
        }
    }

    // adding the shift back can round one ulp past the upper bound
    let x: Vec<f64> = (0..inst.n).map(|i| (inst.lower[i] + z[i]).min(inst.upper[i])).collect();
    let wall_ms = elapsed_ms(started);
    let objective = inst.objective_value(&x);
    let active = count_tight(inst, &x, epsilon.unwrap_or(0.0));
    let stats = SolveStats {
        rap_calls,
        recursion_levels: depth_seen,
        active_constraints: active,
        wall_ms,
    };
    Ok((
        Solution {
            x,
            objective,
            status: Status::Optimal,
            epsilon,
        },
        stats,
    ))
}

/// `1 + ceil(log2 m)`.
pub fn tree_depth(m: usize) -> usize {
    1 + (usize::BITS - (m.max(1) - 1).leading_zeros()) as usize
}

fn elapsed_ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::tests::quadratic;

    fn tighten_example() -> NestedInstance {
        quadratic(4, vec![2, 3, 4], vec![5.0, 7.0], 9.0, vec![1.0, 1.0, 5.0, 5.0])
    }

    #[test]
    fn tighten_worked_example() {
        let inst = tighten_example();
        let wb = tighten(&inst);
        assert_eq!(wb.tight, vec![0.0, 2.0, 7.0, 9.0]);
        assert!(check_feasible(&inst, &wb));
        assert_eq!(wb.lower, vec![0.0; 4]);
        assert_eq!(wb.upper, inst.upper);
    }

    #[test]
    fn tighten_matches_direct_scan() {
        // independent route: a bound can never exceed the previous bound
        // plus everything its own block can hold
        let inst = tighten_example();
        let mut expect = vec![0.0];
        let mut cur: f64 = 0.0;
        for (i, &ai) in inst.a.iter().enumerate() {
            let lo = if i == 0 { 0 } else { inst.s[i - 1] };
            let cap: f64 = inst.upper[lo..inst.s[i]].iter().sum();
            cur = ai.min(cur + cap);
            expect.push(cur);
        }
        expect.push(inst.b);
        assert_eq!(tighten(&inst).tight, expect);
    }

    #[test]
    fn loose_boxes_leave_bounds_alone() {
        let inst = quadratic(3, vec![1, 2, 3], vec![2.0, 3.0], 5.0, vec![1e9; 3]);
        assert_eq!(tighten(&inst).tight, vec![0.0, 2.0, 3.0, 5.0]);
        let single = quadratic(3, vec![3], vec![], 5.0, vec![9.0; 3]);
        assert_eq!(tighten(&single).tight, vec![0.0, 5.0]);
    }

    #[test]
    fn infeasible_examples() {
        let inst = quadratic(2, vec![2], vec![], 3.0, vec![1.0, 1.0]);
        assert!(!check_feasible(&inst, &tighten(&inst)));
        let (sol, _) = solve(&inst, Some(1e-8)).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
    }

    #[test]
    fn full_boxes_are_the_unique_solution() {
        let inst = quadratic(3, vec![1, 3], vec![2.0], 6.0, vec![2.0, 2.0, 2.0]);
        assert!(check_feasible(&inst, &tighten(&inst)));
        let (sol, _) = solve(&inst, Some(1e-9)).unwrap();
        assert_eq!(sol.x, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn block_fill_points() {
        let inst = tighten_example();
        let wb = tighten(&inst);
        assert_eq!(block_fill_point(&inst, &wb, 1), vec![1.0, 1.0]);
        assert_eq!(block_fill_point(&inst, &wb, 2), vec![5.0]);
        let wide = quadratic(2, vec![2], vec![], 3.0, vec![5.0, 5.0]);
        assert_eq!(block_fill_point(&wide, &tighten(&wide), 1), vec![3.0, 0.0]);
    }

    #[test]
    fn two_variable_example_both_modes() {
        let mut inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        let (sol, stats) = solve(&inst, Some(1e-6)).unwrap();
        assert!((sol.x[0] - 1.0).abs() <= 1e-6 && (sol.x[1] - 3.0).abs() <= 1e-6);
        assert!((sol.objective - 10.0).abs() < 1e-5);
        assert_eq!((stats.rap_calls, stats.recursion_levels, stats.active_constraints), (3, 2, 1));

        inst.mode = Mode::Integer;
        let (sol, _) = solve(&inst, None).unwrap();
        assert_eq!(sol.x, vec![1.0, 3.0]);
        assert_eq!(sol.objective, 10.0);
    }

    #[test]
    fn single_block_equals_kernel() {
        let inst = quadratic(3, vec![3], vec![], 6.0, vec![10.0; 3]);
        let (sol, stats) = solve(&inst, Some(1e-9)).unwrap();
        let direct = crate::rap::rap_continuous(
            &RapProblem::new(&inst.objective, &[0.0; 3], &inst.upper, 6.0),
            1e-9,
        )
        .unwrap();
        assert_eq!(sol.x, direct);
        assert_eq!((stats.rap_calls, stats.recursion_levels), (1, 1));
    }

    #[test]
    fn continuous_needs_epsilon() {
        let inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        assert!(matches!(solve(&inst, None), Err(Error::MissingEpsilon)));
    }

    #[test]
    fn tree_depth_values() {
        let depths: Vec<usize> = (1..=9).map(tree_depth).collect();
        assert_eq!(depths, vec![1, 2, 3, 3, 4, 4, 4, 4, 5]);
    }

    #[test]
    fn lower_bounds_shift_the_problem() {
        // x in [1, 4]: same optimum as the zero-based problem shifted by 1
        let mut inst = quadratic(2, vec![1, 2], vec![2.0], 6.0, vec![4.0, 4.0]);
        inst.lower = vec![1.0, 1.0];
        inst.mode = Mode::Integer;
        let (sol, _) = solve(&inst, None).unwrap();
        assert_eq!(sol.x, vec![2.0, 4.0]);
    }

    #[test]
    fn time_limit_is_reported() {
        let inst = crate::model::generate(crate::model::FamilyTag::Crashing, 2000, 2000, 1).unwrap();
        let opts = SolveOptions {
            epsilon: Some(1e-8),
            time_limit: Some(Duration::ZERO),
        };
        let res = solve_with(&inst, &opts);
        assert!(matches!(res, Err(Error::TimeLimit)) || matches!(res, Ok((ref s, _)) if !s.is_optimal()));
    }
}
