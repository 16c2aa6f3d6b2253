//! Traces of operator powers without eigendecomposition: matrix powers of
//! the Nyström system and seeded Monte Carlo estimates of the cyclic
//! integrals `∫_{Ω^p} K(|y₁−y₂|)⋯K(|y_p−y₁|) dy`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Domain, GeometryError};
use crate::kernel::KernelSpec;
use crate::spectral::{DenseMatrix, NystromSystem};

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 10_000;
/// Smallest tolerated `|Ω| / |bounding box|`.
pub const MIN_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("Monte Carlo requires a bounded kernel, got {0}")]
    SingularKernelRejected(String),
    #[error("rejection acceptance {acceptance:.3e} is below {MIN_ACCEPTANCE}")]
    RejectionInefficiency { acceptance: f64 },
    #[error("kernel dimension {kernel} does not match domain dimension {domain}")]
    DimensionMismatch { kernel: usize, domain: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `Tr(A^p)` by repeated multiplication, using `Tr(A^⌈p/2⌉ · A^⌊p/2⌋)`.
pub fn matrix_trace_power(system: &NystromSystem, p: u32) -> Result<f64, TraceError> {
    trace_power(&system.matrix, p)
}

pub fn trace_power(a: &DenseMatrix, p: u32) -> Result<f64, TraceError> {
    if p == 0 {
        return Err(TraceError::InvalidArgument(
            "trace power p must be ≥ 1".into(),
        ));
    }
    if p == 1 {
        return Ok(a.trace());
    }
    let (hi, lo) = (p.div_ceil(2), p / 2);
    let mut power = a.clone();
    let mut low = (lo == 1).then(|| a.clone());
    for k in 2..=hi {
        power = power.matmul(a);
        if k == lo {
            low = Some(power.clone());
        }
    }
    Ok(power.trace_of_product(low.as_ref().unwrap()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub p: u32,
    pub kernel: String,
    pub domain: String,
}

impl McEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, domain: &Domain, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    loop {
        for k in 0..out.len() {
            out[k] = rng.random_range(lo[k]..hi[k]);
        }
        if domain.contains(out) {
            return;
        }
    }
}

/// Estimates the `p`-fold cyclic integral of `kernel` over `domain`.
///
/// Chunk `c` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`; the
/// chunk moments are merged in chunk order, so the result does not depend
/// on the thread count.
pub fn mc_cyclic_trace(
    domain: &Domain,
    kernel: &KernelSpec,
    p: u32,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate, TraceError> {
    if kernel.kernel.is_singular() {
        return Err(TraceError::SingularKernelRejected(kernel.label.clone()));
    }
    if p < 2 {
        return Err(TraceError::InvalidArgument(
            "cycle length p must be ≥ 2".into(),
        ));
    }
    if n_samples < MIN_SAMPLES {
        return Err(TraceError::InvalidArgument(format!(
            "n_samples = {n_samples} is below {MIN_SAMPLES}"
        )));
    }
    let d = domain.dimension();
    if d != kernel.dimension {
        return Err(TraceError::DimensionMismatch {
            kernel: kernel.dimension,
            domain: d,
        });
    }
    let measure = domain.measure()?;
    let (lo, hi) = domain.bounding_box();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let acceptance = measure / box_volume;
    if acceptance < MIN_ACCEPTANCE {
        return Err(TraceError::RejectionInefficiency { acceptance });
    }
    let k = kernel.kernel;
    let p = p as usize;
    let chunks = n_samples.div_ceil(CHUNK);
    let moments: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut pts = vec![0.0; p * d];
            let (mut mean, mut m2) = (0.0, 0.0);
            for s in 0..count {
                for y in pts.chunks_mut(d) {
                    sample_point(&mut rng, domain, &lo, &hi, y);
                }
                let mut prod = 1.0;
                for a in 0..p {
                    let b = (a + 1) % p;
                    let r2: f64 = (0..d)
                        .map(|t| (pts[a * d + t] - pts[b * d + t]).powi(2))
                        .sum();
                    prod *= k.eval_unchecked(r2.sqrt());
                }
                let delta = prod - mean;
                mean += delta / (s + 1) as f64;
                m2 += delta * (prod - mean);
            }
            Moments {
                n: count as f64,
                mean,
                m2,
            }
        })
        .collect();
    let total = moments.into_iter().reduce(Moments::merge).unwrap();
    let scale = measure.powi(p as i32);
    let var = total.m2 / (total.n - 1.0);
    Ok(McEstimate {
        value: scale * total.mean,
        stderr: scale * (var / total.n).sqrt(),
        n_samples,
        seed,
        p: p as u32,
        kernel: kernel.label.clone(),
        domain: domain.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BllComparison {
    pub omega: McEstimate,
    pub ball: McEstimate,
    /// `(ball − omega) / √(se_ball² + se_omega²)`.
    pub dominance_z: f64,
}

/// Seed used for the ball estimate so the two samples are independent.
pub fn ball_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Cyclic integrals over `domain` and its equimeasure ball.
pub fn bll_compare(
    domain: &Domain,
    kernel: &KernelSpec,
    p: u32,
    n_samples: usize,
    seed: u64,
) -> Result<BllComparison, TraceError> {
    let ball = domain.equimeasure_ball()?;
    let omega = mc_cyclic_trace(domain, kernel, p, n_samples, seed)?;
    let ball = mc_cyclic_trace(&ball, kernel, p, n_samples, ball_seed(seed))?;
    let diff = ball.value - omega.value;
    let se = ball.stderr.hypot(omega.stderr);
    let dominance_z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(BllComparison {
        omega,
        ball,
        dominance_z,
    })
}
