use thiserror::Error;

/// Errors raised by the simulator and the measurement harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown profile `{name}`; known profiles: {known}")]
    UnknownProfile { name: String, known: String },

    #[error("unknown boundary condition `{0}`; expected periodic, dirichlet or neumann")]
    UnknownBoundary(String),

    #[error("flatness order must be non-negative, got {0}")]
    NegativeOrder(i64),

    #[error("order exceeds supported maximum {max} at y = {y}")]
    OrderExceedsMaximum { y: f64, max: u32 },

    #[error("grid too coarse: n_y = {0} (need at least 8)")]
    GridTooCoarse(usize),

    #[error("mean of {norm_kind} input is {mean:.3e}, above 1e-8 relative to its norm")]
    NonzeroMean { norm_kind: &'static str, mean: f64 },

    #[error("the x-mean mode k = 0 is excluded")]
    ZeroWavenumber,

    #[error("zero pivot in tridiagonal solve at row {0}")]
    ZeroPivot(usize),

    #[error("non-finite amplitude in mode m = {mode} at t = {time}")]
    NonFinite { mode: u32, time: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shifted frequency {xi:.4} lies outside the stored band |eta| <= {band:.4}; extend eta_grid")]
    ExtendEtaGrid { xi: f64, band: f64 },

    #[error("dense exponential is limited to n_y <= 256, got {0}")]
    TooLargeForDense(usize),

    #[error("need at least {need} usable points, got {got}")]
    TooFewRecords { need: usize, got: usize },

    #[error("right-hand side vanishes; ratio undefined")]
    VanishingRhs,

    #[error("weight exponent overflow at t = {time}: d0 too large")]
    WeightOverflow { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
