//! Crate-wide error type. Variants map 1:1 onto the failure modes of the
//! public operations; the CLI translates them into exit codes (2 for
//! validation problems, 3 for budget overruns).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite (leading minor {minor} of order {order} is ≤ 0)")]
    NotPositiveDefinite { order: usize, minor: i128 },
    #[error("dimension must be ≥ 1")]
    DimensionZero,
    #[error("dimension cap exceeded: n = {n}, maximum 12")]
    DimensionTooLarge { n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad shift token `{token}`")]
    BadToken { token: String },
    #[error("integer-relation search space too large: bound^(n+1) = {size} > 10^9")]
    SearchSpaceTooLarge { size: u128 },
    #[error("enumeration budget exceeded: estimated {estimate:.3e} points > cap {cap:.3e}")]
    BudgetExceeded { estimate: f64, cap: f64 },
    #[error("radius {t} out of range (R_max = {r_max})")]
    RadiusOutOfRange { t: f64, r_max: f64 },
    #[error("eps must be positive, got {eps}")]
    NonpositiveEps { eps: f64 },
    #[error("checkpoint {n} out of range (p_max = {p_max})")]
    CheckpointOutOfRange { n: u64, p_max: u64 },
    #[error("spectral truncation p_cut = {p_cut} exceeds series p_max = {p_max}")]
    TruncationExceedsSeries { p_cut: u64, p_max: u64 },
    #[error("kernel support [{lo}, {hi}] exceeds available radii (R_max = {r_max})")]
    SupportExceedsRadii { lo: f64, hi: f64, r_max: f64 },
    #[error("nonzero rotation angles are only supported for the Gaussian profile")]
    PhiUnsupportedForProfile,
    #[error("theta truncation Λ = {lambda} too small (minimum 8)")]
    TruncationTooSmall { lambda: f64 },
    #[error("coordinate index {k} out of range for dimension {n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("corrupt cache file: {reason}")]
    CorruptCache { reason: String },
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error(
        "non-diagonal matrix in a mean-square/variance path requires --assume-property-1 \
         (the diagonal-case limit theorem is not proved for general forms)"
    )]
    AssumePropertyRequired,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
