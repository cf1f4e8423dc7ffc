//! Storage space allocation for container yards: a typed 4D yard model, the
//! stacking rules, a rehandling-cost objective, a genetic solver and a
//! last-in-first-out baseline.

pub mod bench;
pub mod constraints;
pub mod fitness;
pub mod ga;
pub mod io;
pub mod lifo;
pub mod yard;

pub use constraints::{feasible_positions, is_clean, validate_layout, ConstraintId, Violation};
pub use fitness::{layout_fitness, rehandle_count, FitnessMode, FitnessValue};
pub use ga::{GaConfig, GaError, Individual, RunResult};
pub use lifo::{lifo_allocate, LifoError};
pub use yard::{Container, ContainerId, ContainerType, Coord, Instance, Layout, YardConfig, YardError};
