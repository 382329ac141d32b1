//! The Pitman–Yor process in its two classical representations.
//!
//! * [`stickbreak`] draws beta sticks lazily and allocates observations to
//!   sticks without truncation.
//! * [`crp`] seats customers one at a time using the predictive rule of the
//!   Pitman–Yor partition law.
//! * [`eppf`] evaluates that partition law exactly, in log space.
//! * [`marginal`] evaluates the allocation-vector marginal and carries
//!   numerical checks for the identities linking the two representations.
//! * [`harness`] runs Monte Carlo comparisons, the growth experiment and the
//!   verification suites behind the `pyp` command line tool.

pub mod cli;
pub mod crp;
pub mod eppf;
pub mod error;
pub mod harness;
pub mod marginal;
pub mod params;
pub mod partition;
pub mod special;
pub mod stickbreak;
pub mod tolerances;
pub mod variates;

pub use error::{Error, Result};
pub use params::PYParams;
pub use partition::{
    enumerate_partitions, partition_from_allocations, AllocationVector, Partition,
};
pub use special::{log_rising_factorial, LogProb};
