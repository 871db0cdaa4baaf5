use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected} samples, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Contrast outside the domain where the requested quantity is real.
    #[error("domain error: {0}")]
    Domain(String),

    /// `z = -1` makes the arithmetic-mean reference medium vanish.
    #[error("singular reference medium: {0}")]
    SingularReference(String),

    /// `z` inside the branch cut of the closed-form effective conductivity.
    #[error("z = {0} lies on the branch cut [-3, -1/3]")]
    BranchCut(f64),

    #[error("frequency index ({m}, {n}) out of range for a {n1}x{n2} grid")]
    IndexOutOfRange { m: usize, n: usize, n1: usize, n2: usize },

    #[error("malformed raster: {0}")]
    Raster(String),

    #[error("mismatched series: {0}")]
    SeriesMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
