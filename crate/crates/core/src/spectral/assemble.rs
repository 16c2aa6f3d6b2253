use rayon::prelude::*;
use serde::Serialize;

use super::{DenseMatrix, SpectralError};
use crate::geometry::RasterDomain;
use crate::kernel::{unit_ball_volume, KernelSpec};

/// How the self-interaction entries `A_ii` are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum DiagonalRule {
    /// Radial mass for singular kernels, point value for bounded ones.
    #[default]
    Auto,
    /// `c · ∫_{|y| ≤ r0} K`, with `r0` the radius of the ball of cell volume.
    RadialMass,
    /// `c · h^d · K(0)`; only valid for bounded kernels.
    PointValue,
}

/// Nyström discretization of `f ↦ ∫_Ω K(|x − y|) f(y) dy` on a raster.
///
/// `A_ij = weight · K(|x_i − x_j|)` off the diagonal, with
/// `weight = c · h^d` and calibration `c = |Ω| / (N h^d)` so that the
/// quadrature weights sum to the analytic measure.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub nodes: Vec<[f64; 3]>,
    pub d: usize,
    pub h: f64,
    pub calibration: f64,
    pub weight: f64,
    pub diagonal: f64,
    pub diagonal_rule: DiagonalRule,
    pub matrix: DenseMatrix,
    pub kernel: KernelSpec,
    pub source: String,
}

impl NystromSystem {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Same system with the kernel multiplied by `kappa`.
    pub fn scaled(&self, kappa: f64) -> Self {
        let mut out = self.clone();
        out.matrix.scale(kappa);
        out.weight *= kappa;
        out.diagonal *= kappa;
        out
    }
}

pub fn assemble(
    raster: &RasterDomain,
    kernel: &KernelSpec,
) -> Result<NystromSystem, SpectralError> {
    assemble_with(raster, kernel, DiagonalRule::Auto)
}

pub fn assemble_with(
    raster: &RasterDomain,
    kernel: &KernelSpec,
    rule: DiagonalRule,
) -> Result<NystromSystem, SpectralError> {
    if kernel.dimension != raster.d {
        return Err(SpectralError::DimensionMismatch {
            expected: raster.d,
            found: kernel.dimension,
        });
    }
    if raster.is_empty() {
        return Err(SpectralError::EmptyRaster);
    }
    let n = raster.len();
    let d = raster.d;
    let h = raster.h;
    let cell = raster.cell_volume();
    let calibration = raster.analytic_measure / (n as f64 * cell);
    let weight = calibration * cell;
    let k = kernel.kernel;
    let rule = match rule {
        DiagonalRule::Auto if k.is_singular() => DiagonalRule::RadialMass,
        DiagonalRule::Auto => DiagonalRule::PointValue,
        other => other,
    };
    let diagonal = match rule {
        DiagonalRule::RadialMass => {
            let r0 = (cell / unit_ball_volume(d)).powf(1.0 / d as f64);
            calibration * k.radial_mass(d, r0)?
        }
        DiagonalRule::PointValue => weight * k.eval(0.0)?,
        DiagonalRule::Auto => unreachable!(),
    };

    let cells = &raster.cells;
    let mut data = vec![0.0; n * n];
    // upper triangle from integer lattice offsets, then mirror
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let ci = cells[i];
        row[i] = diagonal;
        for j in i + 1..n {
            let cj = cells[j];
            let mut s2 = 0i64;
            for a in 0..3 {
                let t = ci[a] as i64 - cj[a] as i64;
                s2 += t * t;
            }
            row[j] = weight * k.eval_unchecked(h * (s2 as f64).sqrt());
        }
    });
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    Ok(NystromSystem {
        nodes: raster.centers(),
        d,
        h,
        calibration,
        weight,
        diagonal,
        diagonal_rule: rule,
        matrix: DenseMatrix::from_raw(n, data),
        kernel: kernel.clone(),
        source: raster.source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Domain};
    use crate::kernel::Kernel;
    use crate::quadrature::integrate;

    fn line(cells: &[usize], h: f64, measure: f64) -> RasterDomain {
        RasterDomain {
            d: 1,
            h,
            origin: vec![0.0],
            dims: vec![cells.iter().max().unwrap() + 1],
            cells: cells.iter().map(|&i| [i, 0, 0]).collect(),
            analytic_measure: measure,
            source: "line".into(),
        }
    }

    #[test]
    fn single_cell_radial_mass() {
        let k = KernelSpec::new(Kernel::Gaussian { s: 1.0 }, 1).unwrap();
        let sys = assemble_with(&line(&[0], 1.0, 1.0), &k, DiagonalRule::RadialMass).unwrap();
        // ∫_{-1/2}^{1/2} e^{-t²} dt by an independent quadrature
        let oracle = integrate(|t| (-t * t).exp(), -0.5, 0.5, 1e-14).value;
        assert!((sys.matrix.get(0, 0) - oracle).abs() < 1e-12);
        assert!((oracle - 0.922_562_0).abs() < 1e-7);
        let auto = assemble(&line(&[0], 1.0, 1.0), &k).unwrap();
        assert_eq!(auto.diagonal_rule, DiagonalRule::PointValue);
        assert_eq!(auto.matrix.get(0, 0), 1.0);
    }

    #[test]
    fn two_cells_exponential() {
        let k = KernelSpec::new(Kernel::Exponential { a: 1.0 }, 1).unwrap();
        let sys = assemble(&line(&[0, 1], 1.0, 2.0), &k).unwrap();
        assert_eq!(sys.calibration, 1.0);
        assert!((sys.matrix.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(sys.matrix.get(0, 1), sys.matrix.get(1, 0));
    }

    #[test]
    fn symmetric_and_positive() {
        let disk = Domain::ball(2, 1.0).unwrap();
        let r = rasterize(&disk, 20).unwrap();
        for kernel in [
            Kernel::Gaussian { s: 1.0 },
            Kernel::Riesz { alpha: 1.0 },
            Kernel::Exponential { a: 2.0 },
        ] {
            let k = KernelSpec::new(kernel, 2).unwrap();
            let sys = assemble(&r, &k).unwrap();
            assert_eq!(sys.matrix.max_asymmetry(), 0.0);
            assert!(sys.matrix.as_slice().iter().all(|&x| x > 0.0));
            assert_eq!(sys.n(), r.len());
            let total = sys.weight * sys.n() as f64;
            assert!((total - std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn peierls_diagonal_uses_radial_mass() {
        let cube: Domain = "box:d=3,lo=0,0,0,hi=1,1,1".parse().unwrap();
        let r = rasterize(&cube, 6).unwrap();
        let k = KernelSpec::new(Kernel::Peierls { b: 1.0 }, 3).unwrap();
        let sys = assemble(&r, &k).unwrap();
        let r0 = (r.cell_volume() * 3.0 / (4.0 * std::f64::consts::PI)).cbrt();
        assert_eq!(sys.diagonal_rule, DiagonalRule::RadialMass);
        assert!((sys.matrix.get(0, 0) - (1.0 - (-r0).exp())).abs() < 1e-15);
        assert!(assemble_with(&r, &k, DiagonalRule::PointValue).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let k = KernelSpec::new(Kernel::Gaussian { s: 1.0 }, 2).unwrap();
        assert!(matches!(
            assemble(&line(&[0, 1], 1.0, 2.0), &k),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }
}
