use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("instance too large for exhaustive search: {what} = {size} exceeds {limit}")]
    InstanceTooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("no {0} entities to summarize")]
    EmptyRole(&'static str),

    #[error("unknown entity id {0}")]
    UnknownId(u32),

    #[error("trace of length {len} is too short (need at least {min})")]
    TraceTooShort { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::InvalidParameter { name, value, expected }
    }
}
