//! Problem and solution data model.

pub mod generate;
pub mod instance;
pub mod io;
pub mod objective;
pub mod solution;

pub use generate::{generate, integerize, FamilyTag};
pub use instance::{Mode, NestedInstance};
pub use io::{read_instance, write_instance};
pub use objective::{CustomObjective, Family, ObjectiveSpec};
pub use solution::{Solution, SolveStats, Status};
