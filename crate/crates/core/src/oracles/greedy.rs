//! Unit-increment greedy for integer instances.
//!
//! Starting from `x = lower`, repeatedly add one unit to the variable with the
//! cheapest marginal cost among those that can still grow. A variable that
//! cannot grow now never can again (slacks only shrink), so it is dropped.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};
use crate::model::solution::Solution;

pub fn greedy_nested(inst: &NestedInstance) -> Result<Solution> {
    if inst.mode != Mode::Integer {
        return Err(Error::ModeMismatch("greedy_nested needs an integer instance".into()));
    }
    inst.validate()?;
    let n = inst.n;
    let mut x = inst.lower.clone();
    // slack[j] for interior constraints; the last entry tracks B itself
    let y = inst.prefix_sums(&x);
    let mut slack: Vec<f64> = inst.a.iter().chain(std::iter::once(&inst.b)).zip(&y).map(|(a, y)| a - y).collect();
    if slack[..inst.m - 1].iter().any(|&s| s < 0.0) || slack[inst.m - 1] < 0.0 {
        return Ok(Solution::infeasible(None));
    }
    let mut remaining = slack[inst.m - 1];

    // block index of each variable (0-based constraint index)
    let mut block_of = vec![0; n];
    for v in 1..=inst.m {
        let (start, end) = inst.block(v);
        block_of[start..end].fill(v - 1);
    }

    let marginal = |i: usize, xi: f64| inst.objective.value(i, xi + 1.0) - inst.objective.value(i, xi);
    let mut heap: BinaryHeap<Reverse<(OrderedFloat<f64>, usize)>> = (0..n)
        .filter(|&i| x[i] < inst.upper[i])
        .map(|i| Reverse((OrderedFloat(marginal(i, x[i])), i)))
        .collect();

    while remaining > 0.0 {
        let Some(Reverse((_, i))) = heap.pop() else {
            return Ok(Solution::infeasible(None));
        };
        let first = block_of[i];
        if slack[first..inst.m - 1].iter().any(|&s| s < 1.0) {
            continue;
        }
        x[i] += 1.0;
        for s in &mut slack[first..] {
            *s -= 1.0;
        }
        remaining -= 1.0;
        if x[i] < inst.upper[i] {
            heap.push(Reverse((OrderedFloat(marginal(i, x[i])), i)));
        }
    }
    let objective = inst.objective_value(&x);
    Ok(Solution {
        x,
        objective,
        status: crate::model::solution::Status::Optimal,
        epsilon: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::tests::quadratic;
    use crate::model::solution::Status;

    fn int(mut inst: NestedInstance) -> NestedInstance {
        inst.mode = Mode::Integer;
        inst
    }

    #[test]
    fn two_variable_example() {
        let inst = int(quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]));
        let sol = greedy_nested(&inst).unwrap();
        assert_eq!(sol.x, vec![1.0, 3.0]);
        assert_eq!(sol.objective, 10.0);
    }

    #[test]
    fn zero_budget() {
        let inst = int(quadratic(3, vec![1, 3], vec![0.0], 0.0, vec![3.0; 3]));
        assert_eq!(greedy_nested(&inst).unwrap().x, vec![0.0; 3]);
    }

    #[test]
    fn saturated_first_constraint() {
        let inst = int(quadratic(2, vec![1, 2], vec![0.0], 2.0, vec![2.0, 2.0]));
        assert_eq!(greedy_nested(&inst).unwrap().x, vec![0.0, 2.0]);
    }

    #[test]
    fn infeasible_and_continuous_rejected() {
        let inst = int(quadratic(2, vec![2], vec![], 3.0, vec![1.0, 1.0]));
        assert_eq!(greedy_nested(&inst).unwrap().status, Status::Infeasible);
        let cont = quadratic(2, vec![2], vec![], 1.0, vec![1.0, 1.0]);
        assert!(matches!(greedy_nested(&cont), Err(Error::ModeMismatch(_))));
    }
}
