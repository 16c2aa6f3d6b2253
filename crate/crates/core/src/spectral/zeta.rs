use serde::Serialize;

use super::{assemble, eigendecompose, SpectralError, Spectrum, VectorRequest};
use crate::geometry::RasterDomain;
use crate::kernel::{Kernel, KernelSpec};

/// Measures how well the shifted kernel `Peierls(b + ζ)` reproduces the
/// eigenfunctions of `Peierls(b)` with characteristic numbers `μ_i + ζ`.
pub struct ZetaProbe {
    raster: RasterDomain,
    b: f64,
    base: Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaResidual {
    pub zeta: f64,
    pub index: usize,
    pub mu: f64,
    pub residual: f64,
}

impl ZetaProbe {
    /// Decomposes the base operator keeping the `max_index` leading eigenvectors.
    pub fn new(raster: &RasterDomain, b: f64, max_index: usize) -> Result<Self, SpectralError> {
        if raster.d != 3 {
            return Err(SpectralError::DimensionMismatch {
                expected: 3,
                found: raster.d,
            });
        }
        let kernel = KernelSpec::new(Kernel::Peierls { b }, 3)?;
        let system = assemble(raster, &kernel)?;
        let base = eigendecompose(&system, VectorRequest::Leading(max_index.max(1)))?;
        Ok(Self {
            raster: raster.clone(),
            b,
            base,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.base
    }

    /// Relative residuals `‖u_i − (μ_i + ζ) A_{b+ζ} u_i‖ / ‖u_i‖` for the
    /// requested 1-based eigen indices.
    pub fn residuals(
        &self,
        zeta: f64,
        indices: &[usize],
    ) -> Result<Vec<ZetaResidual>, SpectralError> {
        if !(zeta >= 0.0) {
            return Err(SpectralError::InvalidArgument(format!(
                "zeta = {zeta} must be non-negative"
            )));
        }
        let vectors = self
            .base
            .eigenvectors
            .as_ref()
            .ok_or(SpectralError::MissingEigenvectors)?;
        for &i in indices {
            if i == 0 || i > vectors.len() || self.base.eigenvalues[i - 1] <= self.base.eps_pos {
                return Err(SpectralError::IndexOutOfRange {
                    index: i,
                    available: vectors.len(),
                });
            }
        }
        let shifted = KernelSpec::new(Kernel::Peierls { b: self.b + zeta }, 3)?;
        let system = assemble(&self.raster, &shifted)?;
        Ok(indices
            .iter()
            .map(|&i| {
                let u = &vectors[i - 1];
                let mu = 1.0 / self.base.eigenvalues[i - 1];
                let au = system.matrix.matvec(u);
                let num: f64 = u
                    .iter()
                    .zip(&au)
                    .map(|(x, y)| (x - (mu + zeta) * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let den: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                ZetaResidual {
                    zeta,
                    index: i,
                    mu,
                    residual: num / den,
                }
            })
            .collect())
    }
}

/// Single-shot residual for eigen index `i` (1-based).
pub fn zeta_residual(
    raster: &RasterDomain,
    b: f64,
    zeta: f64,
    i: usize,
) -> Result<f64, SpectralError> {
    let probe = ZetaProbe::new(raster, b, i)?;
    Ok(probe.residuals(zeta, &[i])?[0].residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Domain};

    fn ball_raster(n: usize) -> RasterDomain {
        rasterize(&Domain::ball(3, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn zero_shift_is_the_eigen_equation() {
        let probe = ZetaProbe::new(&ball_raster(8), 1.0, 3).unwrap();
        for r in probe.residuals(0.0, &[1, 2, 3]).unwrap() {
            assert!(r.residual <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn residual_is_continuous_in_zeta() {
        let probe = ZetaProbe::new(&ball_raster(8), 1.0, 2).unwrap();
        for zeta in [0.0, 0.25, 0.5, 1.0] {
            let a = probe.residuals(zeta, &[1, 2]).unwrap();
            let b = probe.residuals(zeta + 1e-4, &[1, 2]).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.residual - y.residual).abs() <= 1e-2);
            }
        }
    }

    #[test]
    fn errors() {
        let disk = rasterize(&Domain::ball(2, 1.0).unwrap(), 8).unwrap();
        assert!(matches!(
            ZetaProbe::new(&disk, 1.0, 1),
            Err(SpectralError::DimensionMismatch { .. })
        ));
        let probe = ZetaProbe::new(&ball_raster(6), 1.0, 2).unwrap();
        assert!(matches!(
            probe.residuals(0.5, &[3]),
            Err(SpectralError::IndexOutOfRange { .. })
        ));
        assert!(probe.residuals(0.5, &[0]).is_err());
        assert!(zeta_residual(&ball_raster(6), 1.0, 0.0, 1).unwrap() <= 1e-8);
    }
}
