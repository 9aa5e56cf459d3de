use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field degree m = {0} is outside the supported range 2..=10")]
    DegreeOutOfRange(u32),
    #[error("polynomial {0:#x} is not an irreducible polynomial of degree {1} over GF(2)")]
    Reducible(u32, u32),
    #[error("nu = {0} does not have absolute trace 1 in the subfield")]
    BadNu(u32),
    #[error("encoding {0} is not an element of a field with {1} elements")]
    BadEncoding(u64, u64),
    #[error("inversion of zero")]
    ZeroInverse,
    #[error("{0} is not in the subfield GF(2^m)")]
    NotInSubfield(u32),
    #[error("{0} is not on the unit circle")]
    NotOnUnitCircle(u32),
    #[error("all coefficients are zero")]
    AllZero,
    #[error("linear map is singular")]
    Singular,
    #[error("coefficient a1 = {0} must lie in GF(2^m); normalize first")]
    A1NotInSubfield(u32),
    #[error(
        "m = {0} is below 4, where the APN characterization does not apply; use the DDT oracle"
    )]
    BelowTheoremScope(u32),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
