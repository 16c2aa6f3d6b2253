//! Numerical laboratory for convolution operators `f ↦ ∫_Ω K(|x − y|) f(y) dy`
//! with positive, radially non-increasing kernels on bounded domains.
//!
//! The crate discretizes such operators by a calibrated Nyström rule on
//! uniform rasters, computes full spectra, and evaluates Schatten norms and
//! related spectral sums. The [`harness`] module drives experiments that
//! compare a domain against its equimeasure ball (or a triangle against the
//! equilateral triangle) with two-resolution Richardson error budgets.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod quadrature;
pub mod spectral;
pub mod trace;

pub use geometry::{Domain, RasterDomain, Triangle};
pub use kernel::{Kernel, KernelSpec};
pub use spectral::{NystromSystem, Spectrum};
