use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::{GeometryError, Triangle};
use crate::kernel::unit_ball_volume;

/// An open bounded domain in `ℝ^d`, `d ∈ {1, 2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Triangle(Triangle),
    /// Simple polygon, vertices in order (either orientation).
    Polygon(Vec<[f64; 2]>),
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).signum()
    };
    let on_segment = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    cross == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn shoelace(vs: &[[f64; 2]]) -> f64 {
    let n = vs.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (vs[i], vs[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

impl Domain {
    pub fn ball(d: usize, radius: f64) -> Result<Self, GeometryError> {
        Self::ball_at(vec![0.0; d], radius)
    }

    pub fn ball_at(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        let dom = Domain::Ball { center, radius };
        dom.validate()?;
        Ok(dom)
    }

    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        let dom = Domain::Box { lo, hi };
        dom.validate()?;
        Ok(dom)
    }

    pub fn triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Result<Self, GeometryError> {
        Ok(Domain::Triangle(Triangle::new(a, b, c)?))
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        let dom = Domain::Polygon(vertices);
        dom.validate()?;
        Ok(dom)
    }

    /// Checks the invariants: positive measure, finite coordinates,
    /// simple polygons, ordered box corners.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let invalid = |why: String| Err(GeometryError::InvalidDomain(why));
        match self {
            Domain::Ball { center, radius } => {
                if !(1..=3).contains(&center.len()) {
                    return invalid(format!("ball dimension {}", center.len()));
                }
                if !center.iter().all(|x| x.is_finite()) || !radius.is_finite() {
                    return invalid("non-finite ball parameters".into());
                }
                if !(*radius > 0.0) {
                    return Err(GeometryError::DegenerateDomain(format!(
                        "ball radius {radius}"
                    )));
                }
            }
            Domain::Triangle(t) => {
                Triangle::new(t.vertices[0], t.vertices[1], t.vertices[2])?;
            }
            Domain::Polygon(vs) => {
                if vs.len() < 3 {
                    return invalid(format!("polygon with {} vertices", vs.len()));
                }
                if !vs.iter().flatten().all(|x| x.is_finite()) {
                    return invalid("non-finite polygon vertex".into());
                }
                let n = vs.len();
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if adjacent {
                            continue;
                        }
                        if segments_cross(vs[i], vs[(i + 1) % n], vs[j], vs[(j + 1) % n]) {
                            return invalid("polygon is not simple".into());
                        }
                    }
                }
                if !(shoelace(vs).abs() > 0.0) {
                    return Err(GeometryError::DegenerateDomain("zero-area polygon".into()));
                }
            }
            Domain::Box { lo, hi } => {
                if lo.len() != hi.len() || !(1..=3).contains(&lo.len()) {
                    return invalid(format!(
                        "box corners of dimension {} and {}",
                        lo.len(),
                        hi.len()
                    ));
                }
                if !lo.iter().chain(hi).all(|x| x.is_finite()) {
                    return invalid("non-finite box corner".into());
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(GeometryError::DegenerateDomain(
                        "box corners not ordered".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Triangle(_) | Domain::Polygon(_) => 2,
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> Result<f64, GeometryError> {
        let m = match self {
            Domain::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            Domain::Triangle(t) => t.area(),
            Domain::Polygon(vs) => shoelace(vs).abs(),
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
        };
        if m > 0.0 && m.is_finite() {
            Ok(m)
        } else {
            Err(GeometryError::DegenerateDomain(format!(
                "{self} has measure {m}"
            )))
        }
    }

    /// Ball centred at the origin with the same dimension and measure.
    pub fn equimeasure_ball(&self) -> Result<Domain, GeometryError> {
        let d = self.dimension();
        let m = self.measure()?;
        let radius = (m / unit_ball_volume(d)).powf(1.0 / d as f64);
        Domain::ball(d, radius)
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::Triangle(t) => bbox2(&t.vertices),
            Domain::Polygon(vs) => bbox2(vs),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            Domain::Ball { center, .. } => center.clone(),
            Domain::Triangle(t) => t.centroid().to_vec(),
            Domain::Polygon(vs) => {
                let n = vs.len();
                let a = shoelace(vs);
                let (mut cx, mut cy) = (0.0, 0.0);
                for i in 0..n {
                    let (p, q) = (vs[i], vs[(i + 1) % n]);
                    let w = p[0] * q[1] - q[0] * p[1];
                    cx += (p[0] + q[0]) * w;
                    cy += (p[1] + q[1]) * w;
                }
                vec![cx / (6.0 * a), cy / (6.0 * a)]
            }
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
        }
    }

    /// Strict membership in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { center, radius } => {
                let r2: f64 = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
                r2 < radius * radius
            }
            Domain::Triangle(t) => t.contains([x[0], x[1]]),
            Domain::Polygon(vs) => {
                let p = [x[0], x[1]];
                let n = vs.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (vs[i], vs[(i + 1) % n]);
                    if point_on_segment(p, a, b) {
                        return false;
                    }
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                        if p[0] < x_cross {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Domain::Box { lo, hi } => lo.iter().zip(hi).zip(x).all(|((l, h), y)| l < y && y < h),
        }
    }

    /// Homothety `x ↦ c + factor·(x − c)` about the centroid `c`.
    pub fn scaled_about_centroid(&self, factor: f64) -> Result<Domain, GeometryError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(GeometryError::InvalidDomain(format!(
                "scale factor {factor}"
            )));
        }
        let c = self.centroid();
        let map2 = |p: [f64; 2]| [c[0] + factor * (p[0] - c[0]), c[1] + factor * (p[1] - c[1])];
        let mapn = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(&c)
                .map(|(x, ci)| ci + factor * (x - ci))
                .collect()
        };
        let out = match self {
            Domain::Ball { center, radius } => Domain::Ball {
                center: center.clone(),
                radius: radius * factor,
            },
            Domain::Triangle(t) => Domain::Triangle(t.map(map2)),
            Domain::Polygon(vs) => Domain::Polygon(vs.iter().map(|&p| map2(p)).collect()),
            Domain::Box { lo, hi } => Domain::Box {
                lo: mapn(lo),
                hi: mapn(hi),
            },
        };
        out.validate()?;
        Ok(out)
    }

    /// Homothetic copy (about the centroid) with the requested measure.
    pub fn with_measure(&self, target: f64) -> Result<Domain, GeometryError> {
        let m = self.measure()?;
        if !(target > 0.0 && target.is_finite()) {
            return Err(GeometryError::DegenerateDomain(format!(
                "target measure {target}"
            )));
        }
        if m == target {
            return Ok(self.clone());
        }
        self.scaled_about_centroid((target / m).powf(1.0 / self.dimension() as f64))
    }

    /// Rotation of a planar domain about its centroid by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Result<Domain, GeometryError> {
        let c = self.centroid();
        let (s, co) = angle.sin_cos();
        let rot = |p: [f64; 2]| {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            [c[0] + co * dx - s * dy, c[1] + s * dx + co * dy]
        };
        match self {
            Domain::Triangle(t) => Ok(Domain::Triangle(t.map(rot))),
            Domain::Polygon(vs) => Ok(Domain::Polygon(vs.iter().map(|&p| rot(p)).collect())),
            Domain::Ball { .. } => Ok(self.clone()),
            Domain::Box { lo, hi } if lo.len() == 2 => {
                let corners = [
                    [lo[0], lo[1]],
                    [hi[0], lo[1]],
                    [hi[0], hi[1]],
                    [lo[0], hi[1]],
                ];
                Ok(Domain::Polygon(corners.iter().map(|&p| rot(p)).collect()))
            }
            _ => Err(GeometryError::InvalidDomain(
                "rotation is only defined in the plane".into(),
            )),
        }
    }

    pub fn as_triangle(&self) -> Option<&Triangle> {
        match self {
            Domain::Triangle(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, Domain::Ball { .. })
    }
}

fn bbox2(vs: &[[f64; 2]]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; 2];
    let mut hi = vec![f64::NEG_INFINITY; 2];
    for v in vs {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn join_points(vs: &[[f64; 2]]) -> String {
    vs.iter()
        .map(|p| format!("{},{}", p[0], p[1]))
        .collect::<Vec<_>>()
        .join(";")
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Ball { center, radius } => {
                write!(f, "ball:d={},r={}", center.len(), radius)?;
                if center.iter().any(|&c| c != 0.0) {
                    write!(f, ",c={}", join(center))?;
                }
                Ok(())
            }
            Domain::Triangle(t) => write!(f, "triangle:{}", join_points(&t.vertices)),
            Domain::Polygon(vs) => write!(f, "polygon:{}", join_points(vs)),
            Domain::Box { lo, hi } => {
                write!(f, "box:d={},lo={},hi={}", lo.len(), join(lo), join(hi))
            }
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_points(spec: &str, body: &str) -> Result<Vec<[f64; 2]>, GeometryError> {
    body.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let xs: Vec<&str> = pair.split(',').collect();
            if xs.len() != 2 {
                return Err(GeometryError::Parse(
                    spec.into(),
                    format!("expected `x,y`, got `{pair}`"),
                ));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| GeometryError::Parse(spec.into(), format!("bad number `{s}`")))
            };
            Ok([num(xs[0])?, num(xs[1])?])
        })
        .collect()
}

/// Splits `d=2,lo=0,0,hi=2,1` into keyed value lists.
fn parse_keyed(spec: &str, body: &str) -> Result<Vec<(String, Vec<f64>)>, GeometryError> {
    let mut out: Vec<(String, Vec<f64>)> = vec![];
    for token in body.split(',') {
        let token = token.trim();
        let value = if let Some((k, v)) = token.split_once('=') {
            out.push((k.trim().to_string(), vec![]));
            v
        } else {
            token
        };
        let x: f64 = value
            .trim()
            .parse()
            .map_err(|_| GeometryError::Parse(spec.into(), format!("bad number `{value}`")))?;
        match out.last_mut() {
            Some((_, vals)) => vals.push(x),
            None => {
                return Err(GeometryError::Parse(
                    spec.into(),
                    "expected `key=value`".into(),
                ))
            }
        }
    }
    Ok(out)
}

impl FromStr for Domain {
    type Err = GeometryError;

    /// Parses `ball:d=3,r=1[,c=x,y,z]`, `box:d=2,lo=0,0,hi=2,1`,
    /// `triangle:0,0;2,0;0,2` or `polygon:x1,y1;x2,y2;...`.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let perr = |why: &str| GeometryError::Parse(spec.to_string(), why.to_string());
        let (name, body) = spec
            .trim()
            .split_once(':')
            .ok_or_else(|| perr("expected `<shape>:<params>`"))?;
        let dom = match name.trim().to_ascii_lowercase().as_str() {
            "ball" | "box" => {
                let fields = parse_keyed(spec, body)?;
                let get = |key: &str| {
                    fields
                        .iter()
                        .find(|(k, _)| k.eq_ignore_ascii_case(key))
                        .map(|(_, v)| v)
                };
                let d = match get("d") {
                    Some(v) if v.len() == 1 && [1.0, 2.0, 3.0].contains(&v[0]) => v[0] as usize,
                    _ => return Err(perr("`d` must be 1, 2 or 3")),
                };
                if name.trim().eq_ignore_ascii_case("ball") {
                    let r = match get("r") {
                        Some(v) if v.len() == 1 => v[0],
                        _ => return Err(perr("expected a single radius `r`")),
                    };
                    let center = match get("c") {
                        Some(v) if v.len() == d => v.clone(),
                        Some(_) => return Err(perr("center must have `d` coordinates")),
                        None => vec![0.0; d],
                    };
                    Domain::Ball { center, radius: r }
                } else {
                    match (get("lo"), get("hi")) {
                        (Some(lo), Some(hi)) if lo.len() == d && hi.len() == d => Domain::Box {
                            lo: lo.clone(),
                            hi: hi.clone(),
                        },
                        _ => return Err(perr("box needs `lo` and `hi` with `d` coordinates each")),
                    }
                }
            }
            "triangle" => {
                let pts = parse_points(spec, body)?;
                if pts.len() != 3 {
                    return Err(perr("a triangle needs exactly three vertices"));
                }
                Domain::Triangle(Triangle {
                    vertices: [pts[0], pts[1], pts[2]],
                })
            }
            "polygon" => Domain::Polygon(parse_points(spec, body)?),
            other => return Err(perr(&format!("unknown shape `{other}`"))),
        };
        dom.validate()?;
        Ok(dom)
    }
}
