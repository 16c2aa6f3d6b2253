//! Spectral sums over characteristic numbers: Schatten norms, heat,
//! resolvent and shifted sums, plus the Perron and decay diagnostics.
//!
//! Sums are written in terms of `λ = 1/μ` so that the huge characteristic
//! numbers of the numerical tail do not overflow, and accumulated from the
//! smallest term upward.

use serde::Serialize;

use super::{SpectralError, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchattenNorm {
    pub value: f64,
    /// The continuum sum `Σ s_n^p` is not known to converge for this kernel.
    pub divergence_caveat: bool,
}

/// `(Σ_n |λ_n|^p)^{1/p}`, or `max |λ_n|` for `p = ∞`.
pub fn schatten_norm(spectrum: &Spectrum, p: f64) -> Result<SchattenNorm, SpectralError> {
    if !(p >= 1.0) {
        return Err(SpectralError::InvalidExponent(p));
    }
    let top = spectrum.operator_norm();
    let divergence_caveat =
        p.is_finite() && spectrum.meta.index_hint.is_some_and(|h| !h.converges(p));
    if p.is_infinite() || top == 0.0 {
        return Ok(SchattenNorm {
            value: top,
            divergence_caveat,
        });
    }
    let mut singular: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.abs() / top).collect();
    singular.sort_by(f64::total_cmp);
    let sum: f64 = singular.iter().map(|s| s.powf(p)).sum();
    Ok(SchattenNorm {
        value: top * sum.powf(1.0 / p),
        divergence_caveat,
    })
}

fn positive_lambdas(spectrum: &Spectrum) -> Result<impl Iterator<Item = f64> + '_, SpectralError> {
    if spectrum.negative_count > 0 || spectrum.char_numbers.is_empty() {
        return Err(SpectralError::NonPositiveSpectrum {
            negative: spectrum.negative_count,
        });
    }
    // char_numbers ascending ⇒ λ descending; iterate smallest λ first
    Ok(spectrum.char_numbers.iter().rev().map(|mu| 1.0 / mu))
}

fn check_p(p: u32) -> Result<(), SpectralError> {
    if p < 1 {
        return Err(SpectralError::InvalidExponent(p as f64));
    }
    Ok(())
}

/// `Σ_i e^{−μ_i t} / μ_i^{p−1}`.
pub fn heat_sum(spectrum: &Spectrum, p: u32, t: f64) -> Result<f64, SpectralError> {
    check_p(p)?;
    if !(t > 0.0) {
        return Err(SpectralError::InvalidArgument(format!(
            "heat time t = {t} must be positive"
        )));
    }
    Ok(positive_lambdas(spectrum)?
        .map(|l| (-t / l).exp() * l.powi(p as i32 - 1))
        .sum())
}

/// `Σ_i 2μ_i / (μ_i^{p−1} (μ_i² − ζ²))`, defined for `|ζ| < μ₁`.
pub fn resolvent_sum(spectrum: &Spectrum, p: u32, zeta: f64) -> Result<f64, SpectralError> {
    check_p(p)?;
    let lambdas = positive_lambdas(spectrum)?;
    let mu1 = spectrum.char_numbers[0];
    if !(zeta.abs() < mu1) {
        return Err(SpectralError::ZetaOutOfRange { zeta, mu1 });
    }
    Ok(lambdas
        .map(|l| 2.0 * l.powi(p as i32) / (1.0 - zeta * zeta * l * l))
        .sum())
}

/// `Σ_j 1 / (μ_j^{p−1} (μ_j + ζ)^n)`, defined for `ζ > −μ₁`.
pub fn shifted_sum(spectrum: &Spectrum, p: u32, n: u32, zeta: f64) -> Result<f64, SpectralError> {
    check_p(p)?;
    if n < 1 {
        return Err(SpectralError::InvalidArgument(
            "shift power n must be ≥ 1".into(),
        ));
    }
    let lambdas = positive_lambdas(spectrum)?;
    let mu1 = spectrum.char_numbers[0];
    if !(zeta > -mu1) {
        return Err(SpectralError::ZetaOutOfRange { zeta, mu1 });
    }
    Ok(lambdas
        .map(|l| l.powi(p as i32 - 1) * (l / (1.0 + zeta * l)).powi(n as i32))
        .sum())
}

/// `F_n(ζ)`: shifted sum of the ball spectrum minus that of the competitor.
pub fn fn_difference(
    ball: &Spectrum,
    other: &Spectrum,
    p: u32,
    n: u32,
    zeta: f64,
) -> Result<f64, SpectralError> {
    Ok(shifted_sum(ball, p, n, zeta)? - shifted_sum(other, p, n, zeta)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexEstimate {
    pub q_hat: f64,
    pub slope: f64,
    /// RMS residual of the log–log fit.
    pub fit_residual: f64,
    pub fitted_points: usize,
}

/// Fits `log s_n ≈ β log n + c` over the middle half of the retained
/// spectrum and returns `q̂ = −1/β`.
pub fn estimate_schatten_index(spectrum: &Spectrum) -> Result<IndexEstimate, SpectralError> {
    let retained: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > spectrum.eps_pos)
        .copied()
        .collect();
    if retained.len() < 50 {
        return Err(SpectralError::InsufficientSpectrum {
            have: retained.len(),
            need: 50,
        });
    }
    let total = retained.len();
    let (lo, hi) = (total / 4, 3 * total / 4);
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi)
        .map(|n| ((n as f64).ln(), retained[n - 1].ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(IndexEstimate {
        q_hat: -1.0 / slope,
        slope,
        fit_residual,
        fitted_points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronReport {
    pub simple: bool,
    pub gap: f64,
    pub sign_consistent: bool,
}

/// Checks that the leading eigenvalue is simple and its eigenvector has
/// one sign (entries below `1e-12·max|v|` in magnitude count as zero).
pub fn perron_check(spectrum: &Spectrum) -> Result<PerronReport, SpectralError> {
    let v = spectrum
        .eigenvectors
        .as_ref()
        .and_then(|vs| vs.first())
        .ok_or(SpectralError::MissingEigenvectors)?;
    let l1 = spectrum.eigenvalues[0];
    let gap = match spectrum.eigenvalues.get(1) {
        Some(l2) => (l1 - l2) / l1,
        None => 1.0,
    };
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    let floor = 1e-12 * pivot.abs();
    let sign_consistent = pivot != 0.0 && v.iter().all(|x| sign * x > -floor);
    Ok(PerronReport {
        simple: gap > 1e-10,
        gap,
        sign_consistent,
    })
}
