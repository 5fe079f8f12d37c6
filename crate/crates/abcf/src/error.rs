use num_bigint::BigInt;

/// Classification of a non-hyperbolic element of SL(2,Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Elliptic,
    Parabolic,
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixKind::Elliptic => write!(f, "elliptic"),
            MatrixKind::Parabolic => write!(f, "parabolic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("operands live in different quadratic fields Q(sqrt({0})) and Q(sqrt({1}))")]
    MixedFields(BigInt, BigInt),
    #[error("cannot mix floating and surd scalars")]
    MixedBacking,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation undefined at infinity")]
    Infinite,
    #[error("matrix is not hyperbolic ({0})")]
    NotHyperbolic(MatrixKind),
    #[error("matrix determinant is not 1")]
    BadDeterminant,
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}
