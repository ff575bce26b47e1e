//! Skill-based Sudoku solving.
//!
//! The crate models the four basic solving skills (naked/hidden singles and
//! doubles) in two interchangeable ways: exact rule oracles, and feed-forward
//! neural networks trained on synthetically generated unit patterns. A
//! hard-coded constraint-propagation solver consults either recognizer and
//! reports how far each one carries a puzzle.
//!
//! Modules, bottom up:
//!
//! - [`board`]: the 9x9 grid, candidate lists, units, degrees of freedom.
//! - [`skills`]: exact finders and propagation for the four skills, plus a
//!   backtracking completer used as a correctness oracle.
//! - [`encoding`]: a unit's nine candidate lists as an 81-bit network input.
//! - [`trainset`]: synthetic detection/localisation datasets with seeded
//!   deterministic splits.
//! - [`mlp`]: a from-scratch tanh/MSE multilayer perceptron with full-batch
//!   back-propagation, early stopping, and text-format persistence.
//! - [`solver`]: the fixed-sequence solver that gates skill application on a
//!   recognizer (exact, detection net, or localisation net).

pub mod board;
pub mod encoding;
pub mod mlp;
pub mod seeds;
pub mod skills;
pub mod solver;
pub mod trainset;

pub use board::{BoardError, CandidateSet, Cell, CellRef, Digit, Grid, Unit, UnitKind};
pub use skills::{SkillError, SkillInstance, SkillKind};
