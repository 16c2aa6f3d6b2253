use faer::{Mat, Side};
use serde::Serialize;

use super::{DenseMatrix, NystromSystem, SpectralError};
use crate::kernel::SchattenIndexHint;

/// Relative threshold below which eigenvalues are treated as numerical zero.
pub const EPS_POS_REL: f64 = 1e-12;
/// Relative eigen-residual bound for retained eigenpairs.
pub const RESIDUAL_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorRequest {
    None,
    /// Keep the eigenvectors of the `k` largest eigenvalues.
    Leading(usize),
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpectrumMeta {
    pub kernel: String,
    pub domain: String,
    pub resolution: Option<usize>,
    pub n: usize,
    pub index_hint: Option<SchattenIndexHint>,
}

/// Eigenvalues `λ₁ ≥ λ₂ ≥ …` of a symmetric discretization together with the
/// characteristic numbers `μ_i = 1/λ_i` of the numerically positive part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub char_numbers: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub eps_pos: f64,
    /// Eigenvalues with `|λ| ≤ eps_pos`.
    pub noise_count: usize,
    /// Eigenvalues with `λ < −eps_pos`.
    pub negative_count: usize,
    pub max_residual: Option<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    /// Builds a spectrum from raw eigenvalues in any order.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::from_sorted(values, None, None, SpectrumMeta::default())
    }

    fn from_sorted(
        eigenvalues: Vec<f64>,
        eigenvectors: Option<Vec<Vec<f64>>>,
        max_residual: Option<f64>,
        mut meta: SpectrumMeta,
    ) -> Self {
        let top = eigenvalues.first().copied().unwrap_or(0.0);
        let eps_pos = EPS_POS_REL * top.abs();
        let char_numbers: Vec<f64> = eigenvalues
            .iter()
            .filter(|&&l| l > eps_pos)
            .map(|l| 1.0 / l)
            .collect();
        let noise_count = eigenvalues.iter().filter(|l| l.abs() <= eps_pos).count();
        let negative_count = eigenvalues.iter().filter(|&&l| l < -eps_pos).count();
        meta.n = eigenvalues.len();
        Self {
            eigenvalues,
            char_numbers,
            eigenvectors,
            eps_pos,
            noise_count,
            negative_count,
            max_residual,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `μ₁`, the smallest positive characteristic number.
    pub fn mu1(&self) -> Option<f64> {
        self.char_numbers.first().copied()
    }

    /// Largest singular value `max |λ|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()))
    }

    pub fn with_meta(mut self, meta: SpectrumMeta) -> Self {
        let n = self.eigenvalues.len();
        self.meta = SpectrumMeta { n, ..meta };
        self
    }
}

fn to_faer(a: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(a.n(), a.n(), |i, j| a.get(i, j))
}

/// Full dense symmetric eigendecomposition of a Nyström matrix.
pub fn eigendecompose(
    system: &NystromSystem,
    vectors: VectorRequest,
) -> Result<Spectrum, SpectralError> {
    let meta = SpectrumMeta {
        kernel: system.kernel.label.clone(),
        domain: system.source.clone(),
        resolution: None,
        n: system.n(),
        index_hint: system.kernel.index_hint(),
    };
    eigendecompose_matrix(&system.matrix, vectors).map(|s| s.with_meta(meta))
}

/// Eigendecomposition of an arbitrary symmetric matrix.
///
/// With eigenvectors, every retained pair must satisfy
/// `‖A v − λ v‖ ≤ 1e-8 ‖A‖`; without them the trace identity
/// `|Tr A − Σλ| ≤ 1e-10 Σ|λ|` is checked instead.
pub fn eigendecompose_matrix(
    a: &DenseMatrix,
    vectors: VectorRequest,
) -> Result<Spectrum, SpectralError> {
    let n = a.n();
    if n == 0 {
        return Err(SpectralError::EmptyRaster);
    }
    let m = to_faer(a);
    let keep = match vectors {
        VectorRequest::None => 0,
        VectorRequest::Leading(k) => k.min(n),
        VectorRequest::All => n,
    };
    let (values, vecs) = if keep == 0 {
        let mut values = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| SpectralError::ConvergenceFailure(format!("{e:?}")))?;
        values.reverse();
        (values, None)
    } else {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| SpectralError::ConvergenceFailure(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let values: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
        let vecs: Vec<Vec<f64>> = (0..keep)
            .map(|c| {
                let col = n - 1 - c;
                (0..n).map(|r| u[(r, col)]).collect()
            })
            .collect();
        (values, Some(vecs))
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::ConvergenceFailure(
            "non-finite eigenvalue".into(),
        ));
    }
    // faer returns ascending order; guard against ties reordered by roundoff
    debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));

    let norm = values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let max_residual = match &vecs {
        Some(vs) => {
            let mut worst = 0.0f64;
            for (v, &lambda) in vs.iter().zip(&values) {
                let av = a.matvec(v);
                let r = av
                    .iter()
                    .zip(v)
                    .map(|(x, y)| (x - lambda * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(r);
            }
            if worst > RESIDUAL_REL * norm {
                return Err(SpectralError::ConvergenceFailure(format!(
                    "eigen-residual {worst:e} exceeds {RESIDUAL_REL:e}·‖A‖ = {:e}",
                    RESIDUAL_REL * norm
                )));
            }
            Some(worst)
        }
        None => {
            let tr = a.trace();
            let sum: f64 = values.iter().sum();
            let abs: f64 = values.iter().map(|l| l.abs()).sum();
            if (tr - sum).abs() > 1e-10 * abs.max(f64::MIN_POSITIVE) {
                return Err(SpectralError::ConvergenceFailure(format!(
                    "trace mismatch: Tr A = {tr}, Σλ = {sum}"
                )));
            }
            None
        }
    };
    Ok(Spectrum::from_sorted(
        values,
        vecs,
        max_residual,
        SpectrumMeta::default(),
    ))
}
