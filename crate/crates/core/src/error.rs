use thiserror::Error;

/// Errors raised by the numerical routines and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("aliasing: degree {degree} exceeds the largest degree {max_allowed} resolved by the grid")]
    Aliasing { degree: usize, max_allowed: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient tensor is not elliptic at node {node} (smallest eigenvalue {margin:e})")]
    Ellipticity { node: usize, margin: f64 },

    #[error("density fails the compatibility condition: moments {moments:?} exceed {threshold:e}")]
    Compatibility { moments: [f64; 3], threshold: f64 },

    #[error("least-squares residual {residual:e} exceeds tolerance {tolerance:e}")]
    NonConvergence { residual: f64, tolerance: f64 },

    #[error("ill-conditioned collocation system: {0}")]
    Conditioning(String),

    #[error("body is not of class C2+: smallest Weingarten eigenvalue {min_eig:e}")]
    NotC2Plus { min_eig: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
