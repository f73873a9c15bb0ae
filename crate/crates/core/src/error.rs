use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("weight table is empty")]
    EmptyTable,

    #[error("weight table has a non-finite or non-positive entry at k = {k}")]
    BadTableEntry { k: i64 },

    #[error(
        "index k = {k} lies outside the weight table [{lo}, {hi}] and the tail rule rejects it"
    )]
    OutsideTable { k: i64, lo: i64, hi: i64 },

    #[error("invalid truncation window [{k_min}, {k_max}]")]
    InvalidWindow { k_min: i64, k_max: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid too coarse: m = {m} (need at least {min})")]
    GridTooCoarse { m: usize, min: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
