use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("BadDimension: dimension {0} is not supported (expected 2, 3 or 4)")]
    BadDimension(usize),
    #[error("BadShape: {0}")]
    BadShape(String),
    #[error("NotHermitian: max asymmetry |M[j][i] - conj(M[i][j])| = {max_asymmetry:.3e} at ({row}, {col})")]
    NotHermitian {
        max_asymmetry: f64,
        row: usize,
        col: usize,
    },
    #[error("NotTraceless: |Tr(A)| = {0:.3e}")]
    NotTraceless(f64),
    #[error("NotNormalized: |v|^2 = {0}")]
    NotNormalized(f64),
    #[error("DimensionMismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ComplexPairing: Tr(AW) has imaginary part {0:.3e}")]
    ComplexPairing(f64),
    #[error("EigenFailure: hermitian eigendecomposition did not converge")]
    EigenFailure,
    #[error("TooFewSamples: {got} samples requested, at least {min} required")]
    TooFewSamples { got: u64, min: u64 },
    #[error("BadShardCount: {shards} shards for {samples} samples")]
    BadShardCount { shards: u32, samples: u64 },
    #[error("NonIncreasingSchedule: sample/s schedule must be strictly increasing")]
    NonIncreasingSchedule,
    #[error("UnsupportedOrder: moment order {0} (supported: 0..=3)")]
    UnsupportedOrder(usize),
    #[error("MomentMismatch: {0}")]
    MomentMismatch(String),
    #[error("BadSpectrum: {0}")]
    BadSpectrum(String),
    #[error("DegenerateSpectrum: (1 - lambda1)(1 - lambda2) = {0:.3e}")]
    DegenerateSpectrum(f64),
    #[error("NonPositiveScale: s = {0}")]
    NonPositiveScale(f64),
    #[error(
        "QuadratureNotConverged: nested-rule relative difference {rel_diff:.3e} at order {order}"
    )]
    QuadratureNotConverged { order: usize, rel_diff: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
