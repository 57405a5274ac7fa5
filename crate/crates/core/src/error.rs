use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("could not parse configuration: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("layer index {layer} out of range 1..={max}")]
    LayerIndex { layer: usize, max: usize },

    #[error("height {z} lies outside layer {layer} = [{bottom}, {top}]")]
    OutsideLayer {
        layer: usize,
        z: f64,
        bottom: f64,
        top: f64,
    },

    #[error("vertical resonance in layer {layer} at |k| = {k}")]
    Resonance { layer: usize, k: f64 },

    #[error("flattening Jacobian {jacobian} is not positive in layer {layer}")]
    NonPositiveJacobian { layer: usize, jacobian: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Parse(_) | Error::LayerIndex { .. })
    }
}
