//! Error types shared across the workbench.

use thiserror::Error;

/// Every failure mode the workbench can report.
///
/// Verification failures (a residue that should vanish but does not, a
/// Newton polygon that contradicts the predicted valuation table, …) are
/// ordinary values of this type, never panics: a nonzero residue is the
/// workbench's headline *result*, not a crash.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("insufficient q-series precision: need at least {needed} terms, have {have}")]
    Precision { needed: usize, have: usize },

    #[error("coefficient of q^{exp} is not divisible by {divisor} during exact division")]
    InexactDivision { exp: i64, divisor: String },

    #[error("c0 = f1(0,0) is not a unit: beta0 does not lift a supersingular j-invariant (or j in {{0,1728}})")]
    NotSupersingular,

    #[error("cache file malformed: {0}")]
    CacheFormat(String),

    #[error("cache checksum mismatch (expected {expected}, found {found})")]
    CacheChecksum { expected: String, found: String },

    #[error("validation failed on cached polynomial: {0}")]
    CacheValidation(String),

    #[error("valuation {num}/{den} is not representable with ramification e = {e}")]
    NotRepresentable { num: i64, den: i64, e: usize },

    #[error("element has no visible digit within precision; valuation only bounded below")]
    BelowPrecision,

    #[error("division by an element of larger valuation: v(num) = {vnum} < v(den) = {vden} (pi-units)")]
    PrecisionLoss { vnum: i64, vden: i64 },

    #[error("all coefficients vanish within precision; Newton polygon undefined")]
    ZeroPolynomial,

    #[error("Newton polygon has no segment of slope -{0}")]
    NoSegment(String),

    #[error("residual polynomial has no simple root with the requested property (lift refusal)")]
    LiftRefusal,

    #[error("Hensel precondition fails: v(f(x0)) = {vf} must exceed 2 v(f'(x0)) = 2*{vfp} (pi-units)")]
    HenselPrecondition { vf: i64, vfp: i64 },

    #[error("Newton iteration stalled at v(f(x)) = {0} pi-units")]
    HenselStall(i64),

    #[error("verification failure [{check}] seed {seed}: {detail}")]
    Verification {
        check: String,
        seed: u64,
        detail: String,
    },

    #[error("bookkeeping mismatch: {0}")]
    Bookkeeping(String),

    #[error("non-integral multiplicity in width table: {0}")]
    NonIntegralMultiplicity(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
