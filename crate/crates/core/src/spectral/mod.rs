//! Nyström assembly, symmetric eigendecomposition and spectral functionals.

mod assemble;
mod eigen;
mod export;
mod functionals;
mod matrix;
mod zeta;

pub use assemble::{assemble, assemble_with, DiagonalRule, NystromSystem};
pub use eigen::{
    eigendecompose, eigendecompose_matrix, Spectrum, SpectrumMeta, VectorRequest, EPS_POS_REL,
    RESIDUAL_REL,
};
pub use export::{read_matrix_binary, write_matrix_binary, write_spectrum_csv};
pub use functionals::{
    estimate_schatten_index, fn_difference, heat_sum, perron_check, resolvent_sum, schatten_norm,
    shifted_sum, IndexEstimate, PerronReport, SchattenNorm,
};
pub use matrix::DenseMatrix;
pub use zeta::{zeta_residual, ZetaProbe, ZetaResidual};

use thiserror::Error;

use crate::kernel::KernelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("raster has no cells")]
    EmptyRaster,
    #[error("eigensolver failure: {0}")]
    ConvergenceFailure(String),
    #[error("Schatten exponent p = {0} must be ≥ 1")]
    InvalidExponent(f64),
    #[error("spectrum is not positive ({negative} eigenvalues below −ε)")]
    NonPositiveSpectrum { negative: usize },
    #[error("zeta = {zeta} outside the admissible range for μ₁ = {mu1}")]
    ZetaOutOfRange { zeta: f64, mu1: f64 },
    #[error("need at least {need} retained eigenvalues, have {have}")]
    InsufficientSpectrum { have: usize, need: usize },
    #[error("eigenvectors were not retained")]
    MissingEigenvectors,
    #[error("eigen index {index} out of range (1..={available})")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("{0}")]
    InvalidArgument(String),
}
