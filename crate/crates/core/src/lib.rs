//! Two-neighbour (and general r-neighbour) bootstrap percolation on `[n]^d`.
//!
//! * [`lattice`]: grids, cells, cubes and configurations.
//! * [`bootstrap`]: closures, internal and sequential spanning, final pairs.
//! * [`exact`]: the constant λ, exact spanning counts, recursion tables and
//!   closed-form bounds.
//! * [`oracle`]: brute-force enumeration over small hypercubes.
//! * [`montecarlo`]: seeded estimators and critical-probability bisection.

pub mod bootstrap;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod montecarlo;
pub mod oracle;

pub use error::{Error, Result};
pub use lattice::{Cell, Configuration, Cube, FamilyMode, GridShape};
