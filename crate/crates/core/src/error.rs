use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("gauge sign tau_{r} makes the denominator cos(r*lambda) + tau_r vanish")]
    SingularGauge { r: usize },

    #[error("gauge constant c must be nonzero")]
    InvalidGauge,

    #[error("auxiliary dimension {d} too small for chain length {n} (need at least {need})")]
    Dimension { d: usize, n: usize, need: usize },

    #[error("chain length {n} exceeds the dense limit {max} for {what}")]
    Size { n: usize, max: usize, what: &'static str },

    #[error("site indices ({j}, {k}) invalid for chain length {n}")]
    Index { j: usize, k: usize, n: usize },

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("steady state is not unique: numerical nullity {nullity}")]
    DegenerateNess { nullity: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
