//! Analytic domains, rasterization onto uniform grids, and Steiner
//! symmetrization.

mod domain;
mod raster;
mod triangle;

pub use domain::Domain;
pub use raster::{rasterize, steiner_symmetrize_raster, RasterDomain};
pub use triangle::{symmetrization_sequence, SymmetrizationSequence, Triangle};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid domain `{0}`: {1}")]
    Parse(String, String),
    #[error("no cell center of the {n}-cell grid falls inside {domain}")]
    EmptyRaster { domain: String, n: usize },
    #[error("raster resolution must be at least 4, got {0}")]
    ResolutionTooSmall(usize),
    #[error("axis {axis} out of range for dimension {d}")]
    AxisOutOfRange { axis: usize, d: usize },
}
