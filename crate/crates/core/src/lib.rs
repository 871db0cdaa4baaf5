//! FFT-based fixed-point solvers for the periodic Lippmann-Schwinger
//! equation of two-phase scalar conductivity, with contrast-series
//! coefficient extraction, convergence diagnostics and rate maps.
//!
//! Phase 2 (the matrix) has unit conductivity and phase 1 has `z`. The
//! imposed average field defaults to `e1 = (1, 0)`.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod greens;
pub mod microstructure;
pub mod ratemap;
pub mod schemes;
pub mod series;

pub use error::{Error, Result};
pub use field::{Grid2D, SpectralVectorField2D, VectorField2D};
pub use greens::{GreenOperator, GreenVariant};
pub use microstructure::{MicroKind, Microstructure};
pub use schemes::{Criterion, EmForm, SchemeKind, SchemeParams, SolveOptions, SolveReport, SolveStatus};
pub use series::SeriesCoefficients;
