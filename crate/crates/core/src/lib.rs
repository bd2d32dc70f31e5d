//! Class groups and 3-ranks of quadratic fields, computed two independent ways.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`] — squarefree sieves, Möbius function, fundamental discriminants,
//!   congruence-family counts and their Euler-product main terms.
//! * [`quad`] — binary quadratic forms: Gauss reduction and composition, reduction
//!   cycles for indefinite forms, the negative Pell criterion, class groups and
//!   their invariant factors, p-ranks, and bulk rank tables for whole
//!   discriminant ranges.
//! * [`cubic`] — binary cubic forms: GL₂(ℤ) reduction and class enumeration à la
//!   Davenport–Heilbronn/Belabas, maximality testing, and the checksum identity
//!   `#maximal classes of disc d = (3^r₃(d) − 1)/2` that cross-checks the two
//!   code paths against each other.
//! * [`experiments`] — torsion averages, indivisibility densities, window
//!   searches, table reproduction, and the Scholz/Byeon/biquadratic checks, all
//!   emitted as typed report rows.
//! * [`cache`] — an append-only CSV cache of class-group results.
//! * [`report`] — CSV/JSON serialization for the report types.
//!
//! Everything is exact integer arithmetic; floating point appears only in final
//! report values (averages, densities, main terms) and as a root-bracketing hint
//! that is always confirmed by exact sign tests.

pub mod arith;
pub mod cache;
pub mod cubic;
pub mod experiments;
pub mod quad;
pub mod report;

use thiserror::Error;

/// Errors surfaced by fallible operations across the crate.
///
/// Pure numeric kernels panic on violated internal invariants instead; these
/// variants cover input validation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input must be nonzero")]
    ZeroInput,

    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),

    #[error("discriminant {0} is definite where an indefinite one is required, or vice versa")]
    WrongSign(i64),

    #[error("forms have different discriminants: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("({0}, {1}) is not an admissible congruence pair")]
    NotAdmissible(u64, u64),

    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(i64),

    #[error("form is degenerate or reducible: {0}")]
    BadCubic(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain is empty: {0}")]
    EmptyDomain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
