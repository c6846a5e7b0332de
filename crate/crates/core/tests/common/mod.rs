#![allow(dead_code)]

use nested_alloc::model::{generate, integerize, FamilyTag, Mode, NestedInstance, ObjectiveSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Continuous quadratic instance with `n = m`. Boxes sit above each block's
/// increment, so `x_i = alpha_i` is feasible.
pub fn quadratic_instance(n: usize, seed: u64) -> NestedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..1.0)).collect();
    let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let upper: Vec<f64> = alpha.iter().map(|a| a + rng.random_range(0.0..1.0)).collect();
    let mut a: Vec<f64> = alpha
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let b = a.pop().unwrap();
    NestedInstance {
        n,
        m: n,
        s: (1..=n).collect(),
        a,
        b,
        lower: vec![0.0; n],
        upper,
        objective: ObjectiveSpec::Quadratic { w, t },
        mode: Mode::Continuous,
    }
}

/// Small integer instance: random `n <= 12`, `m <= n`, `B <= 40`, parameters
/// from the family generator rescaled to integers.
pub fn small_integer_instance(family: FamilyTag, rng: &mut ChaCha8Rng) -> NestedInstance {
    let n = rng.random_range(1..=12usize);
    let m = rng.random_range(1..=n);
    let total = rng.random_range(1..=40u32);
    let seed = rng.random::<u64>();
    integerize(&generate(family, n, m, seed).unwrap(), total)
}

/// `|a - b| <= rel * max(1, |a|, |b|)`; infinities compare equal to themselves.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
