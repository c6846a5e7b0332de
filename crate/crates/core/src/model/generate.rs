//! Seeded instance generators for the benchmark families.
//!
//! Streams come from `ChaCha8Rng::seed_from_u64(seed)` with the `rand`,
//! `rand_chacha` and `rand_distr` versions pinned in the workspace manifest,
//! so a `(family, n, m, seed)` tuple names the same instance everywhere.
//! Draw order per family: the per-variable parameter arrays in the order
//! listed below, then the breakpoints.
//!
//! | family     | draws                                                        |
//! |------------|--------------------------------------------------------------|
//! | F          | p ~ U[0,1] sorted ascending, alpha ~ U[0,1]                  |
//! | F-Uniform  | p ~ U[0,1], alpha ~ U[0,0.5]                                 |
//! | F-Active   | as F-Uniform, alpha sorted descending                        |
//! | Crashing   | p ~ Exp(1), d ~ Exp(1), alpha ~ Exp(mean 0.75)               |
//! | FuelOpt    | p ~ U[0.8,1.2], c ~ U[0.7,1], alpha ~ U[1,1.2]               |
//!
//! `B` is the smaller of `sum alpha` and the largest total the boxes and
//! prefix bounds can carry, so every generated instance is feasible.
//!
//! The F families describe lower bounds `sum_{k<=s[j]} x_k >= sum alpha` on
//! `x in [0,1]^n`; they are stored after the substitution `x -> 1 - x`, which
//! yields upper-bounded prefix sums and a reflected objective.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::instance::{Mode, NestedInstance};
use crate::model::objective::ObjectiveSpec;
use crate::nested::tighten;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    F,
    FUniform,
    FActive,
    Crashing,
    FuelOpt,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 5] = [
        FamilyTag::F,
        FamilyTag::FUniform,
        FamilyTag::FActive,
        FamilyTag::Crashing,
        FamilyTag::FuelOpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::F => "f",
            FamilyTag::FUniform => "f-uniform",
            FamilyTag::FActive => "f-active",
            FamilyTag::Crashing => "crashing",
            FamilyTag::FuelOpt => "fuelopt",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "f" => Ok(FamilyTag::F),
            "f-uniform" => Ok(FamilyTag::FUniform),
            "f-active" => Ok(FamilyTag::FActive),
            "crashing" => Ok(FamilyTag::Crashing),
            "fuelopt" => Ok(FamilyTag::FuelOpt),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// Deterministic continuous-mode instance for `(family, n, m, seed)`.
pub fn generate(family: FamilyTag, n: usize, m: usize, seed: u64) -> Result<NestedInstance> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n", "need n >= 1 and m >= 1"));
    }
    if m > n {
        return Err(Error::TooManyConstraints { n, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match family {
        FamilyTag::F | FamilyTag::FUniform | FamilyTag::FActive => {
            let mut p = uniform(&mut rng, n, 0.0, 1.0);
            let alpha_max = if family == FamilyTag::F { 1.0 } else { 0.5 };
            let mut alpha = uniform(&mut rng, n, 0.0, alpha_max);
            match family {
                // stable sorts keep ties in draw order
                FamilyTag::F => p.sort_by(|x, y| x.total_cmp(y)),
                FamilyTag::FActive => alpha.sort_by(|x, y| y.total_cmp(x)),
                _ => {}
            }
            let s = breakpoints(&mut rng, n, m);
            // x' = 1 - x: sum_{k<=s[j]} x'_k <= s[j] - sum_{k<=s[j]} alpha_k
            let slack: Vec<f64> = alpha.iter().map(|a| 1.0 - a).collect();
            let (a, b) = block_bounds(&slack, &s);
            NestedInstance {
                n,
                m,
                s,
                a,
                b,
                lower: vec![0.0; n],
                upper: vec![1.0; n],
                objective: ObjectiveSpec::F { p, reflect: true },
                mode: Mode::Continuous,
            }
        }
        FamilyTag::Crashing => {
            let unit = Exp::new(1.0).expect("rate 1 is valid");
            let p: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
            let d: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
            let slack_dist = Exp::new(1.0 / 0.75).expect("positive rate");
            let alpha: Vec<f64> = (0..n).map(|_| slack_dist.sample(&mut rng)).collect();
            let s = breakpoints(&mut rng, n, m);
            let lower: Vec<f64> = alpha.iter().zip(&d).map(|(a, d)| a.min(d / 2.0)).collect();
            let (a, b) = block_bounds(&alpha, &s);
            NestedInstance {
                n,
                m,
                s,
                a,
                b,
                lower,
                upper: d,
                // additive constants do not move the argmin
                objective: ObjectiveSpec::Crashing { k: vec![0.0; n], p },
                mode: Mode::Continuous,
            }
        }
        FamilyTag::FuelOpt => {
            let p = uniform(&mut rng, n, 0.8, 1.2);
            let c = uniform(&mut rng, n, 0.7, 1.0);
            let alpha = uniform(&mut rng, n, 1.0, 1.2);
            let s = breakpoints(&mut rng, n, m);
            let upper = c.iter().map(|c| 1.5 * c).collect();
            let (a, b) = block_bounds(&alpha, &s);
            NestedInstance {
                n,
                m,
                s,
                a,
                b,
                lower: c.clone(),
                upper,
                objective: ObjectiveSpec::FuelOpt { p, c },
                mode: Mode::Continuous,
            }
        }
    };
    let inst = NestedInstance {
        b: inst.b.min(reachable_total(&inst)),
        ..inst
    };
    inst.validate()?;
    Ok(inst)
}

/// Largest `sum x` compatible with the boxes and the interior prefix bounds.
fn reachable_total(inst: &NestedInstance) -> f64 {
    let open = NestedInstance {
        b: f64::INFINITY,
        ..inst.clone()
    };
    let wb = tighten(&open);
    let (start, end) = inst.block(inst.m);
    let last: f64 = wb.upper[start..end].iter().sum();
    wb.tight[inst.m - 1] + last + inst.lower.iter().sum::<f64>()
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// `m` strictly increasing 1-based breakpoints ending at `n`.
fn breakpoints(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    if m == n {
        return (1..=n).collect();
    }
    let mut s: Vec<usize> = index::sample(rng, n - 1, m - 1).into_iter().map(|i| i + 1).collect();
    s.sort_unstable();
    s.push(n);
    s
}

/// Interior bounds `a_j = sum_{k <= s[j]} alpha_k` and the total `B`.
fn block_bounds(alpha: &[f64], s: &[usize]) -> (Vec<f64>, f64) {
    let mut bounds = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &sj in s {
        while k < sj {
            acc += alpha[k];
            k += 1;
        }
        bounds.push(acc);
    }
    let b = bounds.pop().unwrap_or(0.0);
    (bounds, b)
}

/// Rescale the resource data of a generated instance to small integers so
/// that `B` lands on `total`, and switch it to integer mode. Objective
/// parameters are kept; the result may be infeasible.
pub fn integerize(inst: &NestedInstance, total: u32) -> NestedInstance {
    let scale = f64::from(total) / inst.b;
    let pole = inst.objective.needs_positive_domain();
    let upper: Vec<f64> = inst.upper.iter().map(|u| (u * scale).round().max(1.0)).collect();
    let lower = inst
        .lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| {
            let l = (l * scale).round();
            if pole { l.max(1.0) } else { l }.min(*u)
        })
        .collect();
    NestedInstance {
        a: inst.a.iter().map(|a| (a * scale).round().max(1.0)).collect(),
        b: f64::from(total),
        lower,
        upper,
        mode: Mode::Integer,
        ..inst.clone()
    }
}
