use thiserror::Error;

/// Errors raised by constructions, verifiers and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field GF({p}^{k}) exceeds the supported size 2^16")]
    FieldTooLarge { p: u64, k: u32 },
    #[error("operands belong to different fields")]
    MismatchedFields,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("construction too large: {0}")]
    Overflow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid unitary error basis: {0}")]
    InvalidBasis(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("the coupling matrix is zero")]
    ZeroMatrix,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("algebraic and numeric averages disagree (relative deviation {0:e})")]
    PathMismatch(f64),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid sign triple: {0}")]
    InvalidSigns(String),
    #[error("invalid target matrix: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_carry_their_data() {
        assert!(Error::LengthMismatch(3, 4).to_string().contains('3'));
        assert!(Error::NotHermitian(0.25).to_string().contains("2.5e-1"));
        let parse: Error = serde_json::from_str::<u32>("x").unwrap_err().into();
        assert!(matches!(parse, Error::Json(_)));
    }
}
