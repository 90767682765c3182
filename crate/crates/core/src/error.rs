use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inversion of zero")]
    InvertZero,
    #[error("precision: {0}")]
    Precision(String),
    #[error("absolute precision {have} fell below the floor of {floor} digits")]
    PrecisionFloor { have: i64, floor: u32 },
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("element is not a unit: {0}")]
    NotUnit(String),
    #[error("series has a nonzero constant term")]
    NonZeroConstant,
    #[error("series vanishes modulo the maximal ideal up to order {0}")]
    NoWeierstrassDegree(usize),
    #[error("truncation insufficient: {0}")]
    Truncation(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid homomorphism: {0}")]
    InvalidHom(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("golden vector parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
