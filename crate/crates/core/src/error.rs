use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block index {index} out of range for algebra with {blocks} blocks")]
    BlockIndex { index: usize, blocks: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("operator is not invertible (smallest singular value {sigma_min:e})")]
    NotInvertible { sigma_min: f64 },

    #[error("partition sums to {sum}, module rank is {rank}")]
    Partition { sum: usize, rank: usize },

    #[error("basis incompatible: {0}")]
    BasisIncompatible(String),

    #[error("not a K-g-frame (optimal lower bound {lower_c:e})")]
    NotKgFrame { lower_c: f64 },

    #[error("not a co-isometry: ||W W* - I|| = {defect:e}")]
    NotCoisometry { defect: f64 },

    #[error("not an isometry: ||W* W - I|| = {defect:e}")]
    NotIsometry { defect: f64 },

    #[error("operators do not commute: ||QK - KQ|| = {defect:e}")]
    NotCommuting { defect: f64 },

    #[error("{which} is not a K-dual (residual {residual:e})")]
    NotDual { which: String, residual: f64 },

    #[error("members do not resolve the identity: ||sum - I|| = {defect:e}")]
    NotResolution { defect: f64 },

    #[error("operator {index} is not square ({domain} -> {codomain})")]
    NonSquare {
        index: usize,
        domain: usize,
        codomain: usize,
    },

    #[error("infeasible instance spec: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
