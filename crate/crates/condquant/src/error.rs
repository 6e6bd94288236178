use thiserror::Error;

/// Everything that can go wrong across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("probabilities sum to {0}, expected 1")]
    ProbSum(String),
    #[error("probability {0} is not strictly positive")]
    NonPositiveProb(String),
    #[error("similarity ratio {0} is outside (0, 1)")]
    BadRatio(String),
    #[error("map images and the nu support are not pairwise disjoint: {0}")]
    SeparationViolation(String),
    #[error("maps and probability vector have different lengths ({maps} vs {probs})")]
    ShapeMismatch { maps: usize, probs: usize },
    #[error("moment equations are degenerate")]
    Degenerate,
    #[error("operation requires a {expected} nu")]
    WrongVariant { expected: &'static str },
    #[error("interval [{lo}, {hi}] is not inside the scaled nu support")]
    OutOfSupport { lo: String, hi: String },
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("codebook is not strictly increasing")]
    UnsortedCodebook,
    #[error("cell {0} has no mass")]
    EmptyCell(usize),
    #[error("requested {cells} cells but the measure has only {atoms} atoms")]
    TooManyCells { cells: usize, atoms: usize },
    #[error("target count {target} is below the current count {current}")]
    CountUnreachable { target: u64, current: u64 },
    #[error("level {n} is below the validity threshold {min}")]
    DomainTooSmall { n: u32, min: u32 },
    #[error("word of length {0} exceeds the maximum of {max}", max = crate::measure::MAX_WORD_LEN)]
    WordTooLong(usize),
    #[error("letter {letter} is not a map index in 1..={maps}")]
    BadLetter { letter: u8, maps: usize },
    #[error("no root of the exponent equation")]
    NoRoot,
    #[error("quantization dimension of nu is unknown for custom systems")]
    UnknownNuDimension,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
