//! Solver dispatch shared by `solve` and `bench`.

use std::time::{Duration, Instant};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use nested_alloc::hull::hull_solve_instance;
use nested_alloc::model::{generate, integerize, FamilyTag, Mode};
use nested_alloc::oracles::{count_tight, greedy_nested};
use nested_alloc::{solve_with, Error, NestedInstance, Solution, SolveOptions, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Recursive decomposition into resource-allocation subproblems.
    #[serde(alias = "decomposition")]
    #[value(alias = "decomposition")]
    Decomp,
    /// Incremental greedy; integer instances only.
    Greedy,
    /// Closed-form convex-hull solution; scale-invariant families only.
    Hull,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Decomp => "decomp",
            SolverKind::Greedy => "greedy",
            SolverKind::Hull => "hull",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    #[serde(alias = "integer")]
    #[value(alias = "integer")]
    Int,
    #[serde(alias = "continuous")]
    #[value(alias = "continuous")]
    Cont,
}

impl ModeArg {
    pub fn name(self) -> &'static str {
        match self {
            ModeArg::Int => "int",
            ModeArg::Cont => "cont",
        }
    }
}

/// Generated instance in the requested mode. Integer instances are rescaled
/// so that `B = 10 n`, which may leave them infeasible.
pub fn instance_for(family: FamilyTag, n: usize, m: usize, seed: u64, mode: ModeArg) -> nested_alloc::Result<NestedInstance> {
    let inst = generate(family, n, m, seed)?;
    Ok(match mode {
        ModeArg::Cont => inst,
        ModeArg::Int => {
            let total = u32::try_from(10 * n).map_err(|_| Error::SizeGuard(format!("n = {n} too large for integer mode")))?;
            integerize(&inst, total)
        }
    })
}

pub struct Outcome {
    pub solution: Solution,
    /// Interior constraints tight at the solution.
    pub active: usize,
    /// Present for the decomposition solver only.
    pub stats: Option<SolveStats>,
    /// Time spent in the solver call itself.
    pub wall_ms: f64,
}

pub fn run(inst: &NestedInstance, solver: SolverKind, epsilon: Option<f64>, time_limit: Option<Duration>) -> nested_alloc::Result<Outcome> {
    let started = Instant::now();
    let (solution, active, stats) = match solver {
        SolverKind::Decomp => {
            let opts = SolveOptions { epsilon, time_limit };
            let (sol, stats) = solve_with(inst, &opts)?;
            (sol, stats.active_constraints, Some(stats))
        }
        SolverKind::Greedy => {
            let sol = greedy_nested(inst)?;
            let active = if sol.is_optimal() { count_tight(inst, &sol.x, 0.0) } else { 0 };
            (sol, active, None)
        }
        SolverKind::Hull => {
            if inst.mode == Mode::Integer {
                return Err(Error::ModeMismatch("hull solver needs a continuous instance".into()));
            }
            let (sol, active) = hull_solve_instance(inst)?;
            (sol, active, None)
        }
    };
    Ok(Outcome {
        solution,
        active,
        stats,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
