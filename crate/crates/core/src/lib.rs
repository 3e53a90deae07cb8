//! Recombination dynamics on finite product spaces.
//!
//! The nonlinear recombination dynamics replaces a population measure by
//! convex combinations of recombined versions of itself, indexed by set
//! partitions of the site set. Tracking all recombined versions at once
//! turns the dynamics into a linear system driven by a triangular Markov
//! generator (continuous time) or Markov matrix (discrete time) over the
//! partition lattice.
//!
//! The crate provides:
//!
//! - [`partition`]: set partitions, the refinement lattice, and the
//!   canonical enumeration indexing all matrices and vectors;
//! - [`measure`]: dense measures on finite product spaces, marginals,
//!   tensor products, and the recombinator operators;
//! - [`rates`]: rate/probability specifications and their marginalization
//!   to subsystems, plus the config file format;
//! - [`linearizer`]: the generator `Q`, the Markov matrix `M`, semigroup
//!   evaluation, and the linearised solution of the dynamics;
//! - [`oracle`]: direct nonlinear integration (RK4) and exact iteration,
//!   used as linearisation-free ground truth;
//! - [`process`]: Monte Carlo simulation of the partition-valued
//!   refinement processes whose law the coefficient vectors describe.

pub mod error;
pub mod export;
pub mod linearizer;
pub mod measure;
pub mod oracle;
pub mod partition;
pub mod process;
pub mod rates;

pub use error::{Error, Result};
pub use linearizer::{CoefficientVector, MatrixKind, PartitionMatrix, TimePoint};
pub use measure::{ProductMeasure, ProductSpace};
pub use partition::{GroundSet, PartitionEnumeration, PartitionIndex, SetPartition};
pub use rates::{Mode, ModeSpec, ProbSpec, RateSpec};
