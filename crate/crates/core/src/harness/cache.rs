use std::collections::BTreeMap;
use std::sync::Arc;

use super::report::Resolution;
use super::HarnessError;
use crate::geometry::{rasterize, Domain};
use crate::kernel::KernelSpec;
use crate::spectral::{assemble, eigendecompose, Spectrum, SpectrumMeta, VectorRequest};

#[derive(Debug, Clone)]
struct Entry {
    spectrum: Arc<Spectrum>,
    resolution: Resolution,
}

/// Spectra of one kernel, keyed by domain and resolution, so that domains
/// shared between comparisons are decomposed once.
#[derive(Debug)]
pub struct SpectrumCache {
    kernel: KernelSpec,
    entries: BTreeMap<(String, usize), Entry>,
}

impl SpectrumCache {
    pub fn new(kernel: KernelSpec) -> Self {
        Self {
            kernel,
            entries: BTreeMap::new(),
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Spectrum of `domain` at resolution `n`; with `vectors`, the leading
    /// eigenvector is retained as well.
    pub fn get(
        &mut self,
        domain: &Domain,
        n: usize,
        vectors: bool,
    ) -> Result<(Arc<Spectrum>, Resolution), HarnessError> {
        let key = (domain.to_string(), n);
        if let Some(e) = self.entries.get(&key) {
            if !vectors || e.spectrum.eigenvectors.is_some() {
                return Ok((e.spectrum.clone(), e.resolution));
            }
        }
        let raster = rasterize(domain, n)?;
        let system = assemble(&raster, &self.kernel)?;
        let request = if vectors {
            VectorRequest::Leading(1)
        } else {
            VectorRequest::None
        };
        let spectrum = eigendecompose(&system, request)?;
        let meta = SpectrumMeta {
            resolution: Some(n),
            ..spectrum.meta.clone()
        };
        let spectrum = Arc::new(spectrum.with_meta(meta));
        let resolution = Resolution {
            n,
            cells: raster.len(),
            h: raster.h,
            discrete_measure: raster.discrete_measure(),
            noise_count: spectrum.noise_count,
            negative_count: spectrum.negative_count,
        };
        self.entries.insert(
            key,
            Entry {
                spectrum: spectrum.clone(),
                resolution,
            },
        );
        Ok((spectrum, resolution))
    }
}
