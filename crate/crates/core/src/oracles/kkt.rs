//! First-order optimality certificate for a candidate allocation.
//!
//! Variables are grouped into segments separated by active prefix
//! constraints. Inside a segment resource can move both ways, so every
//! variable that can still shrink must have a marginal no larger than every
//! variable that can still grow. Across an active constraint resource can
//! only move to the right, which leaves the one-sided condition
//! `left_i <= right_j` for `i` before `j`.
//!
//! Continuous instances use `f'` for both marginals; integer instances use
//! the backward and forward differences, which makes the same test exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktTolerance {
    /// Allowed violation in marginal-cost units.
    pub derivative: f64,
    /// Slack below which a bound counts as active, and allowed infeasibility.
    pub position: f64,
}

impl KktTolerance {
    pub const EXACT: KktTolerance = KktTolerance {
        derivative: 0.0,
        position: 0.0,
    };

    /// Tolerance for an `epsilon`-accurate point: `10 * epsilon` times the
    /// largest local curvature, with positions allowed `10 * epsilon` of
    /// drift. Integer instances only get a round-off allowance.
    pub fn calibrated(inst: &NestedInstance, x: &[f64], epsilon: f64) -> Self {
        if inst.mode == Mode::Integer {
            let scale = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| inst.objective.value(i, xi).abs())
                .fold(1.0, f64::max);
            return KktTolerance {
                derivative: 1e-12 * scale,
                position: 0.0,
            };
        }
        let position = 10.0 * epsilon;
        let mut curvature: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let lo = (xi - position).max(inst.lower[i]);
            let hi = (xi + position).min(inst.upper[i]);
            if let Some(c) = inst.objective.curvature_bound(i, lo.min(hi), hi.max(lo)) {
                curvature = curvature.max(c);
            }
            slope = slope.max(inst.objective.slope(i, xi).abs());
        }
        KktTolerance {
            derivative: 10.0 * epsilon * curvature + 1e-12 * slope.max(1.0),
            position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Largest `max(shrinkable marginal) - min(growable marginal)` over segments.
    pub max_within_block_gap: f64,
    /// Boundary positions `s[i]` in front of a segment whose growable
    /// marginal undercuts a shrinkable marginal further left.
    pub boundary_violations: Vec<usize>,
    /// `a_i - y_i` for the interior constraints.
    pub prefix_slacks: Vec<f64>,
    /// `sum x - B`.
    pub sum_residual: f64,
    /// Indices outside their box.
    pub box_violations: Vec<usize>,
    pub tolerance: KktTolerance,
    pub verdict: Verdict,
}

pub fn verify_kkt(inst: &NestedInstance, x: &[f64], tol: KktTolerance) -> Result<KktReport> {
    if x.len() != inst.n {
        return Err(Error::invalid("x", format!("expected {} entries, got {}", inst.n, x.len())));
    }
    let continuous = inst.mode == Mode::Continuous;
    if continuous && !inst.objective.has_derivative() {
        return Err(Error::MissingDerivative);
    }
    let pos = tol.position;
    let y = inst.prefix_sums(x);
    let prefix_slacks: Vec<f64> = inst.a.iter().zip(&y).map(|(a, y)| a - y).collect();
    let sum_residual = y[inst.m - 1] - inst.b;
    let box_violations: Vec<usize> = (0..inst.n)
        .filter(|&i| x[i] < inst.lower[i] - pos || x[i] > inst.upper[i] + pos)
        .collect();

    let left = |i: usize| {
        if continuous {
            inst.objective.slope(i, x[i])
        } else {
            inst.objective.value(i, x[i]) - inst.objective.value(i, x[i] - 1.0)
        }
    };
    let right = |i: usize| {
        if continuous {
            inst.objective.slope(i, x[i])
        } else {
            inst.objective.value(i, x[i] + 1.0) - inst.objective.value(i, x[i])
        }
    };

    let mut max_gap: f64 = 0.0;
    let mut boundary_violations = Vec::new();
    // largest shrinkable marginal left of the current segment
    let mut carried = f64::NEG_INFINITY;
    let mut seg_lo = f64::NEG_INFINITY;
    let mut seg_hi = f64::INFINITY;
    let mut seg_start_boundary: Option<usize> = None;
    let mut crossed = false;
    for v in 1..=inst.m {
        let (start, end) = inst.block(v);
        for i in start..end {
            if x[i] > inst.lower[i] + pos {
                seg_lo = seg_lo.max(left(i));
            }
            if x[i] < inst.upper[i] - pos {
                let r = right(i);
                seg_hi = seg_hi.min(r);
                if r < carried - tol.derivative {
                    crossed = true;
                }
            }
        }
        let closes = v == inst.m || prefix_slacks[v - 1] <= pos;
        if closes {
            max_gap = max_gap.max(seg_lo - seg_hi);
            if crossed {
                if let Some(j) = seg_start_boundary {
                    boundary_violations.push(j);
                }
            }
            carried = carried.max(seg_lo);
            seg_lo = f64::NEG_INFINITY;
            seg_hi = f64::INFINITY;
            crossed = false;
            seg_start_boundary = Some(inst.s[v - 1]);
        }
    }

    let feasible = box_violations.is_empty()
        && prefix_slacks.iter().all(|&s| s >= -pos)
        && sum_residual.abs() <= pos.max(1e-12 * inst.b.abs().max(1.0));
    let pass = feasible && max_gap <= tol.derivative && boundary_violations.is_empty();
    Ok(KktReport {
        max_within_block_gap: max_gap,
        boundary_violations,
        prefix_slacks,
        sum_residual,
        box_violations,
        tolerance: tol,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}
