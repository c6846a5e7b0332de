use crate::model::instance::{Mode, NestedInstance};
use crate::nested::tighten;

/// Number of interior constraints `i < m` with `a_i - y_i <= tol`. Integer
/// instances count exact equality only.
pub fn count_active(inst: &NestedInstance, x: &[f64], tol: f64) -> usize {
    let tol = match inst.mode {
        Mode::Integer => 0.0,
        Mode::Continuous => tol,
    };
    let y = inst.prefix_sums(x);
    inst.a.iter().zip(&y).filter(|(a, y)| *a - *y <= tol).count()
}

/// Number of interior constraints whose tightened bound is met:
/// `tight_i - (y_i - sum_{k <= s[i]} lower_k) <= tol`. Bounds that only bind
/// because the boxes of a block are full count as well.
pub fn count_tight(inst: &NestedInstance, x: &[f64], tol: f64) -> usize {
    let tol = match inst.mode {
        Mode::Integer => 0.0,
        Mode::Continuous => tol,
    };
    let wb = tighten(inst);
    let mut y = 0.0;
    let mut k = 0;
    let mut count = 0;
    for (j, &sj) in inst.s[..inst.m - 1].iter().enumerate() {
        while k < sj {
            y += x[k] - inst.lower[k];
            k += 1;
        }
        if wb.tight[j + 1] - y <= tol {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::tests::quadratic;
    use crate::model::objective::ObjectiveSpec;

    #[test]
    fn examples() {
        let inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        assert_eq!(count_active(&inst, &[1.0, 3.0], 1e-9), 1);
        assert_eq!(count_active(&inst, &[0.5, 3.5], 1e-9), 0);
        let single = quadratic(2, vec![2], vec![], 4.0, vec![3.0, 3.0]);
        assert_eq!(count_active(&single, &[1.0, 3.0], 1e-9), 0);
    }

    #[test]
    fn tight_counts_full_blocks() {
        // block 1 can hold at most 1 < a_1 = 2, so its bound tightens to 1
        let inst = quadratic(2, vec![1, 2], vec![2.0], 4.0, vec![1.0, 3.0]);
        assert_eq!(count_active(&inst, &[1.0, 3.0], 1e-9), 0);
        assert_eq!(count_tight(&inst, &[1.0, 3.0], 1e-9), 1);
        let loose = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        assert_eq!(count_tight(&loose, &[1.0, 3.0], 1e-9), 1);
        assert_eq!(count_tight(&loose, &[0.5, 3.5], 1e-9), 0);
    }

    #[test]
    fn integer_mode_is_exact() {
        let mut inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        inst.mode = Mode::Integer;
        assert_eq!(count_active(&inst, &[1.0 - 1e-12, 3.0], 1.0), 0);
        assert_eq!(count_active(&inst, &[1.0, 3.0], 0.0), 1);
    }

    #[test]
    fn ignores_objective_constants() {
        let mut inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 3.0]);
        let before = count_active(&inst, &[1.0, 3.0], 1e-9);
        inst.objective = ObjectiveSpec::Crashing { k: vec![5.0, 7.0], p: vec![1.0, 1.0] };
        assert_eq!(count_active(&inst, &[1.0, 3.0], 1e-9), before);
    }
}
