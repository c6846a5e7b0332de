//! Reference solvers and certificate checks used to validate the main solver.

pub mod active;
pub mod brute;
pub mod greedy;
pub mod kkt;

pub use active::{count_active, count_tight};
pub use brute::brute_force_integer;
pub use greedy::greedy_nested;
pub use kkt::{verify_kkt, KktReport, KktTolerance, Verdict};
