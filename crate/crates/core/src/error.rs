use thiserror::Error;

use crate::chain::BoundaryCase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring size {n} outside supported range {min}..={max}")]
    RingSize { n: u32, min: u32, max: u32 },

    #[error("player index {index} outside 1..={n}")]
    PlayerIndex { index: usize, n: u32 },

    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },

    #[error("dihedral reduction requires p1 = p2")]
    DihedralAsymmetric,

    #[error("parameters fall in {0:?}, which this operation does not support")]
    UnsupportedBoundary(BoundaryCase),

    #[error("chain has {0} closed classes; the stationary distribution is not unique")]
    Reducible(usize),

    #[error("singular linear system")]
    Singular,

    #[error("stationarity residual {0:e} exceeds tolerance")]
    Residual(f64),

    #[error("{what} changes sign {changes} times along the p1 scan line")]
    NonMonotone { what: &'static str, changes: usize },

    #[error("state count {states} exceeds the limit {limit} for this operation")]
    TooLarge { states: usize, limit: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
