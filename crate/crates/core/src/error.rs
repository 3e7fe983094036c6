use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral parameter k = {k_re}{k_im:+}i is at a branch point (k^2 = m^2, m = {m})")]
    BranchPoint { k_re: f64, k_im: f64, m: f64 },

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential does not decay: boundary ring max {ring:.3e} exceeds 1e-10 x interior max {max:.3e}")]
    Tail { ring: f64, max: f64 },

    #[error("k is within {distance:.3e} of the discrete free spectrum")]
    NearSpectrum { distance: f64 },

    #[error("problem size {size} exceeds the dense limit {limit}")]
    Size { size: usize, limit: usize },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("no complex outliers were observed in the trial family")]
    NoOutliers,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed potential file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
