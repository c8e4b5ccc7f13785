//! Exact arithmetic for integral quadratic lattices.
//!
//! The crate is organized bottom-up:
//!   * [`mat`] — exact dense linear algebra (rationals, big integers, i64).
//!   * [`lattice`] — even lattices, discriminant forms, moment matrices.
//!   * [`padic`] — Jordan splittings over Z_p and hyperbolic-stack embeddings.
//!   * [`cyclo`] — the cyclotomic field Q(zeta_N) with exact square roots of
//!     discriminants.
//!   * [`weil`] — the metaplectic action on functions on cosets, as exact
//!     cyclotomic matrices, plus the numeric automorphy cocycle.
//!   * [`theta`] — lattice-point enumeration, theta coefficient tables,
//!     numeric evaluation with tail bounds, and the modularity checks.
//!   * [`cycles`] — the formal coefficient algebra keyed by (T, coset tuple)
//!     orbits: products, pullbacks, translation action.
//!   * [`embed`] — integral embedding search and certificates (hyperbolic
//!     pairs, self-dual overlattices, r-bounds, local-global assembly).
//!   * [`checks`] — the end-to-end verification battery with pinned
//!     reference values; also drives the CLI's `verify-all`.

pub mod checks;
pub mod cyclo;
pub mod cycles;
pub mod embed;
pub mod lattice;
pub mod mat;
pub mod padic;
pub mod theta;
pub mod weil;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("lattice Gram must have even diagonal (got odd entry at {0})")]
    OddDiagonal(usize),
    #[error("lattice Gram must be nondegenerate")]
    Degenerate,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("genus must be >= 1")]
    BadGenus,
    #[error("enumeration budget exceeded: needs about {needed} lattice tuples, cap is {cap} (raise QLAT_ENUM_BUDGET to override)")]
    EnumBudget { needed: u128, cap: u128 },
    #[error("precision too low: {0}")]
    Precision(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
