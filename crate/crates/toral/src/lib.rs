//! Exact dynamics of integer matrices on the rational lattices (Z/nZ)^d:
//! periodic-orbit censuses, matrix orders and their prime-power lifting
//! behaviour, pretail trees of non-invertible actions, conjugacy invariants,
//! and (reversing) symmetry groups.
//!
//! All arithmetic is exact. Brute-force enumerations exist alongside the
//! structural algorithms and the two are cross-checked in the test suite;
//! enumerations are capped (defaults of 10^7 points / group elements) and
//! refuse loudly rather than degrade.

pub mod arith;
pub mod catmap;
pub mod census;
pub mod dot;
pub mod error;
pub mod order;
pub mod pretail;
pub mod ring;
pub mod symmetry;

pub use error::{Error, Result};
pub use ring::{IntMatrix, LatticeSpec, ResidueMatrix};

/// Default cap on lattice points for full functional-graph enumeration.
pub const DEFAULT_MAX_POINTS: u64 = 10_000_000;

/// Default cap on group/search-space size for exhaustive scans.
pub const DEFAULT_MAX_GROUP: u64 = 10_000_000;
