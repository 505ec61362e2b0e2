use alloc::string::String;

/// Errors produced by the classification core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("invalid label mask: {0}")]
    InvalidLabels(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("class {class_id} has {available} labeled pixels, {required} required")]
    InsufficientSamples {
        class_id: u32,
        available: usize,
        required: usize,
    },
    #[error("covariance of class {class_id} is not positive definite")]
    NotPositiveDefinite { class_id: u32 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("eigen decomposition did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    /// True for failures of the numerical routines (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::NoConvergence(_) | Error::NotSymmetric
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
