//! Coded elastic computing on machines with heterogeneous speeds and storage.
//!
//! The pipeline for one time step:
//!
//! 1. [`optimizer::solve_load`] picks a computation load per available machine
//!    that minimizes the finishing time.
//! 2. [`assignment::fill`] / [`assignment::fill_heterogeneous`] turn the loads
//!    into row sets, each decoded from `L` coded sub-matrices.
//! 3. [`sim::run_step`] runs the workers over an MDS-coded matrix
//!    ([`codec`]) and decodes `X·w`.

pub mod assignment;
pub mod cli;
pub mod codec;
pub mod field;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod rational;
pub mod sim;

pub use assignment::{fill, fill_heterogeneous, AssignmentError, AssignmentPlan};
pub use codec::{build_generator, encode, CodecError, Generator};
pub use field::{FieldMatrix, PrimeField, DEFAULT_PRIME};
pub use model::{validate_scenario, AvailabilitySet, LoadVector, Scenario, StorageMap};
pub use optimizer::{solve_load, OptimizerError, OptimizerSolution};
pub use rational::Rational;
pub use sim::{run_step, run_timeline, StepOutcome, StepReport};
