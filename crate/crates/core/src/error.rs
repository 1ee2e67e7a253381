use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input width {w_in} outside [1, {cap}]")]
    InputWidth { w_in: u32, cap: u32 },

    #[error("output width {0} outside [1, 63]")]
    OutputWidth(u32),

    #[error("table has {got} entries, expected 2^{w_in} = {}", 1u64 << w_in)]
    TableLength { w_in: u32, got: usize },

    #[error("value {value:#x} at address {addr} does not fit in {w_out} bits")]
    ValueOverflow { addr: usize, value: u64, w_out: u32 },

    #[error("address {addr:#x} out of range for a {w_in}-bit input")]
    Address { addr: u64, w_in: u32 },

    #[error("mask has {mask} entries but table has {table}")]
    SizeMismatch { table: usize, mask: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid decomposition: {0}")]
    Invariant(String),

    #[error("instance outside exhaustive bounds: {0}")]
    Bounds(String),

    #[error("`{0}` is not a valid Verilog identifier")]
    Identifier(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
