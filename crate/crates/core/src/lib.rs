//! Separable convex resource allocation with nested ascending constraints.
//!
//! The solver splits the constraint chain in halves, solves each half, and
//! uses the two partial solutions as variable bounds for a single
//! resource-allocation subproblem over the union. Integer problems are solved
//! exactly; continuous problems to a max-norm accuracy `epsilon`.
//!
//! ```
//! use nested_alloc::model::{Mode, NestedInstance, ObjectiveSpec};
//!
//! let inst = NestedInstance {
//!     n: 2,
//!     m: 2,
//!     s: vec![1, 2],
//!     a: vec![1.0],
//!     b: 4.0,
//!     lower: vec![0.0; 2],
//!     upper: vec![3.0; 2],
//!     objective: ObjectiveSpec::Quadratic { w: vec![1.0; 2], t: vec![0.0; 2] },
//!     mode: Mode::Integer,
//! };
//! let (sol, stats) = nested_alloc::solve(&inst, None).unwrap();
//! assert_eq!(sol.x, vec![1.0, 3.0]);
//! assert_eq!(stats.rap_calls, 3);
//! ```

pub mod error;
pub mod hull;
pub mod model;
pub mod nested;
pub mod oracles;
pub mod rap;

pub use error::{Error, Result};
pub use model::{NestedInstance, Solution, SolveStats, Status};
pub use nested::{solve, solve_with, SolveOptions};
