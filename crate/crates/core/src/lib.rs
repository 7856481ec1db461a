//! Particle solver for one-dimensional pressureless flow under a maximal density
//! constraint.
//!
//! Densities are represented through their monotone transport maps over a reference
//! measure; the constraint becomes membership in a translated cone of monotone maps,
//! and each time step is a weighted isotonic regression.

// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod dynamics;
mod error;
pub mod eulerian;
pub mod force;
pub mod heterogeneous;
pub mod monotone;
pub mod oracle;
pub mod particles;
pub mod pava;
pub mod projection;
pub mod scenarios;

pub use error::{Error, Result};
pub use monotone::{Block, BlockPartition, MonotoneMap};
pub use particles::{build_particles, ParticleSystem};
pub use projection::{congested_transport, project_admissible, project_monotone};
