use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// The chain sits on a point it may never occupy: zero density, or a
    /// zero coordinate for the dive samplers.
    #[error("invalid chain state: {0}")]
    InvalidState(String),

    #[error("target `{0}` has no gradient")]
    MissingGradient(String),

    #[error("series is constant")]
    DegenerateSeries,

    #[error("sample too small: need at least {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("log posterior is not finite at {0}")]
    Domain(String),
}
