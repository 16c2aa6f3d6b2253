use serde::Serialize;

use super::GeometryError;

/// A planar triangle with vertices in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triangle {
    pub vertices: [[f64; 2]; 3],
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

impl Triangle {
    pub fn new(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Result<Self, GeometryError> {
        let t = Self {
            vertices: [a, b, c],
        };
        if !t.vertices.iter().flatten().all(|x| x.is_finite()) {
            return Err(GeometryError::InvalidDomain("non-finite vertex".into()));
        }
        let scale = t.side_lengths().iter().fold(0.0f64, |m, &s| m.max(s));
        if !(t.area() > 1e-14 * scale * scale) {
            return Err(GeometryError::DegenerateDomain(format!(
                "triangle {:?}",
                t.vertices
            )));
        }
        Ok(t)
    }

    /// Equilateral triangle of the given area, centered at the origin, with
    /// one side parallel to the x-axis.
    pub fn equilateral(area: f64) -> Result<Self, GeometryError> {
        if !(area > 0.0 && area.is_finite()) {
            return Err(GeometryError::DegenerateDomain(format!("area {area}")));
        }
        let side = (4.0 * area / 3f64.sqrt()).sqrt();
        let circumradius = side / 3f64.sqrt();
        let v = |k: f64| {
            let angle = std::f64::consts::FRAC_PI_2 + k * 2.0 * std::f64::consts::PI / 3.0;
            [circumradius * angle.cos(), circumradius * angle.sin()]
        };
        Self::new(v(1.0), v(2.0), v(0.0))
    }

    pub(crate) fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * cross(sub(b, a), sub(c, a))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Side `i` joins vertex `i` to vertex `i + 1 (mod 3)`.
    pub fn side_lengths(&self) -> [f64; 3] {
        let v = &self.vertices;
        [dist(v[0], v[1]), dist(v[1], v[2]), dist(v[2], v[0])]
    }

    pub fn perimeter(&self) -> f64 {
        self.side_lengths().iter().sum()
    }

    /// `max side − min side`.
    pub fn side_spread(&self) -> f64 {
        let s = self.side_lengths();
        let max = s.iter().cloned().fold(f64::MIN, f64::max);
        let min = s.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    pub fn centroid(&self) -> [f64; 2] {
        let v = &self.vertices;
        [
            (v[0][0] + v[1][0] + v[2][0]) / 3.0,
            (v[0][1] + v[1][1] + v[2][1]) / 3.0,
        ]
    }

    /// Strict interior test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [a, b, c] = self.vertices;
        let s = self.signed_area().signum();
        let d1 = cross(sub(b, a), sub(p, a)) * s;
        let d2 = cross(sub(c, b), sub(p, b)) * s;
        let d3 = cross(sub(a, c), sub(p, c)) * s;
        d1 > 0.0 && d2 > 0.0 && d3 > 0.0
    }

    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            vertices: self.vertices.map(f),
        }
    }

    /// Steiner symmetrization with respect to the perpendicular bisector of
    /// side `side`.
    ///
    /// Every chord parallel to the side keeps its length and is recentred on
    /// the bisector, so the image is the isosceles triangle on the same base
    /// with its apex on the bisector at height `2·area / base`.
    pub fn steiner_symmetrize(&self, side: usize) -> Result<Self, GeometryError> {
        if side > 2 {
            return Err(GeometryError::InvalidDomain(format!("side index {side}")));
        }
        let a = self.vertices[side];
        let b = self.vertices[(side + 1) % 3];
        let c = self.vertices[(side + 2) % 3];
        let base = sub(b, a);
        let len = base[0].hypot(base[1]);
        let twice_area = cross(base, sub(c, a));
        if !(twice_area.abs() > 0.0 && len > 0.0) {
            return Err(GeometryError::DegenerateDomain(format!(
                "triangle {:?}",
                self.vertices
            )));
        }
        let height = twice_area.abs() / len;
        // unit normal pointing to the side of the original apex
        let sign = twice_area.signum();
        let normal = [-base[1] / len * sign, base[0] / len * sign];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let apex = [mid[0] + height * normal[0], mid[1] + height * normal[1]];
        let mut vertices = self.vertices;
        vertices[(side + 2) % 3] = apex;
        Ok(Self { vertices })
    }
}

/// Output of [`symmetrization_sequence`]; `converged == false` reports that
/// `max_iter` was reached before the side spread dropped below tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrizationSequence {
    pub triangles: Vec<Triangle>,
    pub converged: bool,
}

/// Applies Steiner symmetrizations about the side bisectors, cycling through
/// sides 0, 1, 2, until the side spread is below `tol`. The input is the
/// first element of the returned sequence.
pub fn symmetrization_sequence(
    t: &Triangle,
    tol: f64,
    max_iter: usize,
) -> Result<SymmetrizationSequence, GeometryError> {
    if !(tol > 0.0) {
        return Err(GeometryError::InvalidDomain(format!("tolerance {tol}")));
    }
    let mut triangles = vec![*t];
    let mut current = *t;
    for k in 0..max_iter {
        if current.side_spread() < tol {
            return Ok(SymmetrizationSequence {
                triangles,
                converged: true,
            });
        }
        current = current.steiner_symmetrize(k % 3)?;
        triangles.push(current);
    }
    Ok(SymmetrizationSequence {
        converged: current.side_spread() < tol,
        triangles,
    })
}
