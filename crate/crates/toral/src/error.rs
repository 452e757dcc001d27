use num_bigint::BigUint;
use thiserror::Error;

/// Errors surfaced by the library.
///
/// Expected domain outcomes (a singular matrix has no inverse, a point is
/// aperiodic, ...) are encoded in return types, not here; these variants are
/// for contract violations and resource refusals.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("invalid lattice: d = {d}, n = {n} (need d >= 1, n >= 1)")]
    InvalidLattice { d: usize, n: u64 },

    #[error("matrix parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("not a unit mod {n}: {value} has gcd({value}, {n}) = {g}")]
    NotAUnit { value: u64, n: u64, g: u64 },

    #[error("enumeration cap exceeded: {required} points needed, cap is {cap}")]
    EnumerationCap { required: BigUint, cap: u64 },

    #[error("search cap exceeded: {required} candidates, cap is {cap}")]
    SearchCap { required: BigUint, cap: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("plateau phenomenon present for p = {p} (s = {s}); the generic prime-power formula does not apply")]
    PlateauProviso { p: u64, s: u32 },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
