use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use super::{Domain, GeometryError};

/// Cells of a uniform grid whose centres lie inside a domain.
///
/// Cell `idx` occupies `origin + h·[idx, idx + 1)` along each axis; unused
/// trailing axes of `idx` are zero. `dims` is the lattice extent of the
/// bounding box and `analytic_measure` the exact measure of the source domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterDomain {
    pub d: usize,
    pub h: f64,
    pub origin: Vec<f64>,
    pub dims: Vec<usize>,
    pub cells: Vec<[usize; 3]>,
    pub analytic_measure: f64,
    pub source: String,
}

impl RasterDomain {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    /// `|cells| · h^d`.
    pub fn discrete_measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_volume()
    }

    pub fn center(&self, idx: &[usize; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for k in 0..self.d {
            c[k] = self.origin[k] + (idx[k] as f64 + 0.5) * self.h;
        }
        c
    }

    pub fn centers(&self) -> Vec<[f64; 3]> {
        self.cells.iter().map(|c| self.center(c)).collect()
    }

    /// Writes the occupied cell centres as CSV (`x[,y[,z]]`).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let names = ["x", "y", "z"];
        writeln!(out, "{}", names[..self.d].join(","))?;
        for c in self.centers() {
            let row: Vec<String> = c[..self.d].iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Rasterizes `domain` with `n` cells along the longest bounding-box axis.
/// A cell is kept iff its centre lies in the open domain.
pub fn rasterize(domain: &Domain, n: usize) -> Result<RasterDomain, GeometryError> {
    if n < 4 {
        return Err(GeometryError::ResolutionTooSmall(n));
    }
    let analytic_measure = domain.measure()?;
    let d = domain.dimension();
    let (lo, hi) = domain.bounding_box();
    let longest = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| h - l)
        .fold(0.0f64, f64::max);
    let h = longest / n as f64;
    let dims: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, u)| (((u - l) / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
        .collect();
    let mut ext = [1usize; 3];
    ext[..d].copy_from_slice(&dims);
    let mut cells = vec![];
    let mut x = vec![0.0; d];
    for i in 0..ext[0] {
        for j in 0..ext[1] {
            for k in 0..ext[2] {
                let idx = [i, j, k];
                for a in 0..d {
                    x[a] = lo[a] + (idx[a] as f64 + 0.5) * h;
                }
                if domain.contains(&x) {
                    cells.push(idx);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(GeometryError::EmptyRaster {
            domain: domain.to_string(),
            n,
        });
    }
    Ok(RasterDomain {
        d,
        h,
        origin: lo,
        dims,
        cells,
        analytic_measure,
        source: domain.to_string(),
    })
}

/// Discrete Steiner symmetrization along `axis`: on every lattice line
/// parallel to the axis the occupied cells are replaced by the same number
/// of contiguous cells centred on the mid-plane of the bounding box. When
/// the count and extent differ in parity the block sits half a cell toward
/// the negative side.
pub fn steiner_symmetrize_raster(
    r: &RasterDomain,
    axis: usize,
) -> Result<RasterDomain, GeometryError> {
    if axis >= r.d {
        return Err(GeometryError::AxisOutOfRange { axis, d: r.d });
    }
    let mut lines: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    for c in &r.cells {
        let mut key = *c;
        key[axis] = 0;
        *lines.entry(key).or_default() += 1;
    }
    let extent = r.dims[axis];
    let mut cells = Vec::with_capacity(r.cells.len());
    for (key, count) in lines {
        let start = (extent - count) / 2;
        for t in start..start + count {
            let mut c = key;
            c[axis] = t;
            cells.push(c);
        }
    }
    cells.sort_unstable();
    Ok(RasterDomain { cells, ..r.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_square_is_exact() {
        let b: Domain = "box:d=2,lo=0,0,hi=1,1".parse().unwrap();
        let r = rasterize(&b, 4).unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!(r.h, 0.25);
        assert_eq!(r.discrete_measure(), 1.0);
    }

    #[test]
    fn disk_measure_within_two_percent() {
        let disk = Domain::ball(2, 1.0).unwrap();
        let r = rasterize(&disk, 64).unwrap();
        // independent count of cell centres with |x| < 1
        let h = 2.0 / 64.0;
        let mut count = 0;
        for i in 0..64 {
            for j in 0..64 {
                let (x, y) = (-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                if x * x + y * y < 1.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(r.len(), count);
        assert!((r.discrete_measure() - PI).abs() < 0.02 * PI);
        assert_eq!(r.analytic_measure, PI);
    }

    #[test]
    fn small_triangle_keeps_strict_interior_centres() {
        let t: Domain = "triangle:0,0;1,0;0,1".parse().unwrap();
        let r = rasterize(&t, 4).unwrap();
        assert_eq!(r.len(), 6);
    }

    #[test]
    fn convex_raster_measure_converges() {
        for s in ["ball:d=2,r=1", "triangle:0,0;4,0;0,3", "ball:d=3,r=1"] {
            let dom: Domain = s.parse().unwrap();
            let m = dom.measure().unwrap();
            // averaged over a few resolutions to damp lattice-alignment noise
            let err = |n: usize| -> f64 {
                (0..4)
                    .map(|k| (rasterize(&dom, n + k).unwrap().discrete_measure() - m).abs())
                    .sum::<f64>()
            };
            let (e1, e2) = (err(16), err(32));
            assert!(e2 <= 0.75 * e1, "{s}: {e1} -> {e2}");
        }
    }

    #[test]
    fn empty_raster_and_small_n() {
        let b = Domain::ball(2, 1.0).unwrap();
        assert!(matches!(
            rasterize(&b, 3),
            Err(GeometryError::ResolutionTooSmall(3))
        ));
        // skinny sliver whose centres all miss
        let t = Domain::triangle([0.0, 0.0], [1.0, 0.0], [1.0, 0.01]).unwrap();
        assert!(matches!(
            rasterize(&t, 4),
            Err(GeometryError::EmptyRaster { .. })
        ));
    }

    fn line_raster(indices: &[usize], extent: usize) -> RasterDomain {
        RasterDomain {
            d: 1,
            h: 1.0,
            origin: vec![0.0],
            dims: vec![extent],
            cells: indices.iter().map(|&i| [i, 0, 0]).collect(),
            analytic_measure: indices.len() as f64,
            source: "test".into(),
        }
    }

    #[test]
    fn line_symmetrization() {
        // lattice indices 0..=8
        let r = line_raster(&[0, 1, 5], 9);
        let s = steiner_symmetrize_raster(&r, 0).unwrap();
        assert_eq!(s.cells, vec![[3, 0, 0], [4, 0, 0], [5, 0, 0]]);
        // parity mismatch: two cells on a 9-cell line lean negative
        let s = steiner_symmetrize_raster(&line_raster(&[7, 8], 9), 0).unwrap();
        assert_eq!(s.cells, vec![[3, 0, 0], [4, 0, 0]]);
    }

    #[test]
    fn symmetric_raster_is_fixed_and_counts_preserved() {
        let disk = Domain::ball(2, 1.0).unwrap();
        let r = rasterize(&disk, 32).unwrap();
        for axis in 0..2 {
            assert_eq!(steiner_symmetrize_raster(&r, axis).unwrap(), r);
        }
        let t: Domain = "triangle:0,0;4,0;0,3".parse().unwrap();
        let r = rasterize(&t, 24).unwrap();
        for axis in 0..2 {
            let s = steiner_symmetrize_raster(&r, axis).unwrap();
            assert_eq!(s.len(), r.len());
            assert_eq!(steiner_symmetrize_raster(&s, axis).unwrap(), s);
        }
        assert!(steiner_symmetrize_raster(&r, 2).is_err());
    }

    #[test]
    fn csv_export() {
        let b: Domain = "box:d=2,lo=0,0,hi=1,1".parse().unwrap();
        let r = rasterize(&b, 4).unwrap();
        let mut buf = vec![];
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y");
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1], "0.125,0.125");
    }
}
