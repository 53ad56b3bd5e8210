use thiserror::Error;

/// Errors surfaced by fallible operations across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability must lie in {range}, got {p}")]
    InvalidProbability { p: f64, range: &'static str },

    #[error("invalid rectangle corners ({x1},{y1})..({x2},{y2}): require x1 <= x2 and y1 <= y2")]
    InvalidRect { x1: i32, y1: i32, x2: i32, y2: i32 },

    #[error("rectangle {rect} is not contained in the configuration box {domain}")]
    RectOutsideBox { rect: String, domain: String },

    #[error("site ({x},{y}) lies outside the configuration box {domain}")]
    SiteOutsideBox { x: i32, y: i32, domain: String },

    #[error("configuration box {domain} does not cover {needed}, required by the event")]
    BoxTooSmall { needed: String, domain: String },

    #[error("invalid index range: require {requirement}, got a={a}, b={b}")]
    InvalidRange {
        a: u32,
        b: u32,
        requirement: &'static str,
    },

    #[error("invalid growth schedule: {0}")]
    InvalidSchedule(String),

    #[error("scale levels must be strictly increasing, got {0:?}")]
    NonIncreasingLevels(Vec<u32>),

    #[error("enumeration refused: estimated {estimate:.3e} candidates exceeds cap {cap}")]
    CapExceeded { estimate: f64, cap: u64 },

    #[error("enumeration support of {cells} cells exceeds cap {cap}")]
    SupportTooLarge { cells: u32, cap: u32 },

    #[error("tolerance {0:.3e} is not achievable in 64-bit floating point")]
    ToleranceTooSmall(f64),

    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
