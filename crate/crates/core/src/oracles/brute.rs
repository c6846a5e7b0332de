//! Exhaustive dynamic program over (variable, resource used so far).

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};
use crate::model::solution::{Solution, Status};

pub const MAX_N: usize = 12;
pub const MAX_B: f64 = 40.0;

/// Exact integer optimum; among optimal points the lexicographically
/// smallest is returned.
pub fn brute_force_integer(inst: &NestedInstance) -> Result<Solution> {
    if inst.mode != Mode::Integer {
        return Err(Error::ModeMismatch("brute_force_integer needs an integer instance".into()));
    }
    inst.validate()?;
    if inst.n > MAX_N || inst.b > MAX_B {
        return Err(Error::SizeGuard(format!("need n <= {MAX_N} and B <= {MAX_B}")));
    }
    let n = inst.n;
    let total = inst.b as usize;
    // cap[k]: largest admissible prefix sum after the first k variables
    let mut cap = vec![total as f64; n + 1];
    for (j, &a) in inst.a.iter().enumerate() {
        cap[inst.s[j]] = cap[inst.s[j]].min(a);
    }

    // best[k][t]: cheapest completion of variables k.. given t already used
    let inf = f64::INFINITY;
    let mut best = vec![vec![inf; total + 1]; n + 1];
    best[n][total] = 0.0;
    for k in (0..n).rev() {
        let (lo, hi) = (inst.lower[k] as usize, inst.upper[k] as usize);
        for t in 0..=total {
            let mut b = inf;
            for v in lo..=hi.min(total - t) {
                let next = t + v;
                if next as f64 > cap[k + 1] || best[k + 1][next] == inf {
                    continue;
                }
                b = b.min(inst.objective.value(k, v as f64) + best[k + 1][next]);
            }
            best[k][t] = b;
        }
    }
    if best[0][0] == inf {
        return Ok(Solution::infeasible(None));
    }

    let mut x = Vec::with_capacity(n);
    let mut t = 0;
    for k in 0..n {
        let (lo, hi) = (inst.lower[k] as usize, inst.upper[k] as usize);
        let target = best[k][t];
        let slack = 1e-12 * target.abs().max(1.0);
        let v = (lo..=hi.min(total - t))
            .find(|&v| {
                let next = t + v;
                next as f64 <= cap[k + 1] && inst.objective.value(k, v as f64) + best[k + 1][next] <= target + slack
            })
            .expect("some choice attains the stored minimum");
        x.push(v as f64);
        t += v;
    }
    let objective = inst.objective_value(&x);
    Ok(Solution {
        x,
        objective,
        status: Status::Optimal,
        epsilon: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::tests::quadratic;

    fn int(mut inst: NestedInstance) -> NestedInstance {
        inst.mode = Mode::Integer;
        inst
    }

    #[test]
    fn two_variable_example() {
        let sol = brute_force_integer(&int(quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]))).unwrap();
        assert_eq!(sol.x, vec![1.0, 3.0]);
        assert_eq!(sol.objective, 10.0);
    }

    #[test]
    fn single_variable() {
        let sol = brute_force_integer(&int(quadratic(1, vec![1], vec![], 3.0, vec![5.0]))).unwrap();
        assert_eq!(sol.x, vec![3.0]);
        let sol = brute_force_integer(&int(quadratic(1, vec![1], vec![], 6.0, vec![5.0]))).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
    }

    #[test]
    fn lexicographic_tie_break() {
        // symmetric costs, odd budget: (1,2) and (2,1) tie
        let sol = brute_force_integer(&int(quadratic(2, vec![2], vec![], 3.0, vec![3.0, 3.0]))).unwrap();
        assert_eq!(sol.x, vec![1.0, 2.0]);
    }

    #[test]
    fn size_guard() {
        let inst = int(quadratic(13, vec![13], vec![], 1.0, vec![1.0; 13]));
        assert!(matches!(brute_force_integer(&inst), Err(Error::SizeGuard(_))));
        let inst = int(quadratic(2, vec![2], vec![], 41.0, vec![30.0; 2]));
        assert!(matches!(brute_force_integer(&inst), Err(Error::SizeGuard(_))));
    }
}
