//! Heuristic solver for one-dimensional cutting stock with variable roll
//! weights and rest-width restrictions.
//!
//! Items are bands of a given width that must reach a desired total weight;
//! rolls have a width, length and specific weight, and only certain residual
//! widths may be left over on a used roll. The solver minimizes the total
//! weight of used rolls with a pool of local-search candidates.

pub mod engine;
pub mod generate;
pub mod init;
pub mod io;
pub mod metric;
pub mod model;
pub mod ops;
pub mod pool;
pub mod state;
pub mod workers;

pub use engine::{solve, EngineConfig, SolveError, SolveReport, Termination};
pub use model::{Assignment, ConstraintSet, Instance};
