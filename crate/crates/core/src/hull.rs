//! Closed-form solution for scale-invariant objectives.
//!
//! When `f_i(x) = gamma_i * h(x / gamma_i)` for one strictly convex `h` and
//! the boxes never bind, the optimal prefix-sum curve is the lower convex
//! hull `Phi` of the points `(Gamma_{s[j]}, a_j)`, `j = 0..m`, where `Gamma`
//! are the prefix sums of `gamma`. Each variable then receives
//! `x_i = Phi(Gamma_i) - Phi(Gamma_{i-1})`, i.e. `gamma_i` times the slope of
//! the hull segment containing it. Interior hull vertices are exactly the
//! active constraints.
//!
//! | family    | gamma_i          |
//! |-----------|------------------|
//! | Crashing  | sqrt(p_i)        |
//! | FuelOpt   | c_i * p_i^(1/4)  |
//! | Quadratic | 1 / w_i (t = 0)  |
//!
//! The F family carries a linear term and custom objectives cannot be
//! classified, so neither is eligible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::generate::{generate, FamilyTag};
use crate::model::instance::NestedInstance;
use crate::model::objective::ObjectiveSpec;
use crate::model::solution::{Solution, Status};

/// Relative tolerance on cross products below which three points count as
/// collinear.
const COLLINEAR_TOL: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct HullInstance {
    pub gamma: Vec<f64>,
    /// 1-based breakpoints, last one `n`.
    pub s: Vec<usize>,
    /// `m + 1` ordinates: `0`, the interior bounds, then `B`.
    pub levels: Vec<f64>,
}

/// Scale parameters for an eligible objective.
pub fn gamma(objective: &ObjectiveSpec) -> Result<Vec<f64>> {
    match objective {
        ObjectiveSpec::Crashing { p, .. } => Ok(p.iter().map(|p| p.sqrt()).collect()),
        ObjectiveSpec::FuelOpt { p, c } => Ok(p.iter().zip(c).map(|(p, c)| c * p.sqrt().sqrt()).collect()),
        ObjectiveSpec::Quadratic { w, t } if t.iter().all(|&t| t == 0.0) => Ok(w.iter().map(|w| 1.0 / w).collect()),
        _ => Err(Error::NotHullEligible),
    }
}

impl HullInstance {
    pub fn from_instance(inst: &NestedInstance) -> Result<Self> {
        let gamma = gamma(&inst.objective)?;
        if let Some(i) = gamma.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("objective", format!("scale parameter {i} is not positive")));
        }
        let mut levels = Vec::with_capacity(inst.m + 1);
        levels.push(0.0);
        levels.extend_from_slice(&inst.a);
        levels.push(inst.b);
        Ok(HullInstance {
            gamma,
            s: inst.s.clone(),
            levels,
        })
    }

    /// Points `(Gamma_{s[j]}, a_j)` for `j = 0..m`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.s.len() + 1);
        pts.push((0.0, 0.0));
        let mut acc = 0.0;
        let mut k = 0;
        for (j, &sj) in self.s.iter().enumerate() {
            while k < sj {
                acc += self.gamma[k];
                k += 1;
            }
            pts.push((acc, self.levels[j + 1]));
        }
        pts
    }
}

/// Indices into `points` of the lower convex hull, collinear points dropped.
pub fn lower_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(16);
    for (k, &c) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let a = points[hull[hull.len() - 2]];
            let b = points[hull[hull.len() - 1]];
            let (ux, uy) = (b.0 - a.0, b.1 - a.1);
            let (vx, vy) = (c.0 - a.0, c.1 - a.1);
            let cross = ux * vy - uy * vx;
            let scale = (ux * vy).abs() + (uy * vx).abs();
            if cross <= COLLINEAR_TOL * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Hull solution together with the number of active interior constraints.
pub fn hull_solve(hi: &HullInstance) -> (Solution, usize) {
    let pts = hi.points();
    let vertices = lower_hull(&pts);
    let n = hi.gamma.len();
    let mut x = vec![0.0; n];
    for w in vertices.windows(2) {
        let (p, q) = (pts[w[0]], pts[w[1]]);
        let slope = (q.1 - p.1) / (q.0 - p.0);
        let start = if w[0] == 0 { 0 } else { hi.s[w[0] - 1] };
        let end = hi.s[w[1] - 1];
        for i in start..end {
            x[i] = slope * hi.gamma[i];
        }
    }
    let active = vertices.len().saturating_sub(2);
    let sol = Solution {
        x,
        objective: f64::NAN,
        status: Status::Optimal,
        epsilon: None,
    };
    (sol, active)
}

/// Solve an eligible instance through the hull and check afterwards that no
/// box bound would have changed the answer.
pub fn hull_solve_instance(inst: &NestedInstance) -> Result<(Solution, usize)> {
    inst.validate()?;
    let hi = HullInstance::from_instance(inst)?;
    let (mut sol, active) = hull_solve(&hi);
    if let Some(index) = (0..inst.n).find(|&i| sol.x[i] < inst.lower[i] || sol.x[i] > inst.upper[i]) {
        return Err(Error::HullNotApplicable { index });
    }
    sol.objective = inst.objective_value(&sol.x);
    Ok((sol, active))
}

/// Copy of `inst` whose boxes cannot bind: `upper = max(upper, B)` and
/// `lower = floor` (a tiny positive value keeps pole objectives finite).
pub fn lift_for_hull(inst: &NestedInstance, floor: f64) -> NestedInstance {
    NestedInstance {
        lower: vec![floor; inst.n],
        upper: inst.upper.iter().map(|u| u.max(inst.b)).collect(),
        ..inst.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub m: usize,
    pub trials: usize,
    pub mean_active: f64,
    pub std_active: f64,
}

/// Mean and sample standard deviation of the active-constraint count of
/// hull solutions over `trials` generated instances with `n = m`, seeds
/// `seed + trial`.
pub fn active_growth_experiment(family: FamilyTag, m_list: &[usize], trials: usize, seed: u64) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut counts = Vec::with_capacity(trials);
        for t in 0..trials {
            let inst = generate(family, m, m, seed + t as u64)?;
            let hi = HullInstance::from_instance(&inst)?;
            let vertices = lower_hull(&hi.points()).len();
            counts.push(vertices.saturating_sub(2) as f64);
        }
        let k = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / k.max(1.0);
        let var = if counts.len() > 1 {
            counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        rows.push(GrowthRow {
            m,
            trials,
            mean_active: mean,
            std_active: var.sqrt(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::tests::quadratic;

    fn unit(levels: Vec<f64>) -> HullInstance {
        HullInstance {
            gamma: vec![1.0, 1.0],
            s: vec![1, 2],
            levels,
        }
    }

    #[test]
    fn both_vertices_kept() {
        let (sol, active) = hull_solve(&unit(vec![0.0, 1.0, 4.0]));
        assert_eq!(sol.x, vec![1.0, 3.0]);
        assert_eq!(active, 1);
    }

    #[test]
    fn middle_point_above_hull() {
        let (sol, active) = hull_solve(&unit(vec![0.0, 3.0, 4.0]));
        assert_eq!(sol.x, vec![2.0, 2.0]);
        assert_eq!(active, 0);
    }

    #[test]
    fn single_segment_is_proportional() {
        let hi = HullInstance {
            gamma: vec![1.0, 2.0, 5.0],
            s: vec![3],
            levels: vec![0.0, 16.0],
        };
        let (sol, active) = hull_solve(&hi);
        assert_eq!(sol.x, vec![2.0, 4.0, 10.0]);
        assert_eq!(active, 0);
    }

    #[test]
    fn collinear_points_dropped() {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| (k as f64 * 0.7, k as f64 * 0.7)).collect();
        assert_eq!(lower_hull(&pts), vec![0, 5]);
    }

    #[test]
    fn instance_route_matches_quadratic_example() {
        let inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![4.0, 4.0]);
        let (sol, active) = hull_solve_instance(&inst).unwrap();
        assert_eq!(sol.x, vec![1.0, 3.0]);
        assert_eq!(active, 1);
        assert_eq!(sol.objective, 10.0);
    }

    #[test]
    fn eligibility() {
        let f = generate(FamilyTag::F, 10, 10, 1).unwrap();
        assert!(matches!(hull_solve_instance(&f), Err(Error::NotHullEligible)));
        let shifted = ObjectiveSpec::Quadratic { w: vec![1.0], t: vec![0.5] };
        assert!(matches!(gamma(&shifted), Err(Error::NotHullEligible)));
    }

    #[test]
    fn binding_box_is_reported() {
        let inst = quadratic(2, vec![1, 2], vec![1.0], 4.0, vec![3.0, 2.5]);
        assert!(matches!(hull_solve_instance(&inst), Err(Error::HullNotApplicable { index: 1 })));
    }

    #[test]
    fn growth_rows() {
        let rows = active_growth_experiment(FamilyTag::Crashing, &[1, 50], 5, 0).unwrap();
        assert_eq!(rows[0].mean_active, 0.0);
        assert_eq!(rows[1].trials, 5);
        assert!(rows[1].mean_active > 0.0);
    }
}
