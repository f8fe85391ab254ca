use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed membership and bounding box of a subset of `R^d`.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    fn bbox(&self) -> AxisBox;
}

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AxisBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() || min.len() > 3 {
            return Err(Error::Domain("box corners must share a dimension in 1..=3".into()));
        }
        if min.iter().zip(&max).any(|(a, b)| !(a < b)) {
            return Err(Error::Domain("degenerate box".into()));
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.min.iter().zip(&self.max).zip(x).all(|((a, b), v)| *a <= *v && *v <= *b)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(a, b)| b - a).collect()
    }

    pub fn min_width(&self) -> f64 {
        self.widths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    /// Intersection, or `None` when it has empty interior.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let min: Vec<f64> = self.min.iter().zip(&other.min).map(|(a, b)| a.max(*b)).collect();
        let max: Vec<f64> = self.max.iter().zip(&other.max).map(|(a, b)| a.min(*b)).collect();
        AxisBox::new(min, max).ok()
    }

    /// Euclidean distance from `x` to the box (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .zip(x)
            .map(|((a, b), v)| {
                let e = (a - v).max(v - b).max(0.0);
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance between two boxes.
    pub fn box_distance(&self, other: &AxisBox) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .zip(other.min.iter().zip(&other.max))
            .map(|((a0, a1), (b0, b1))| {
                let e = (b0 - a1).max(a0 - b1).max(0.0);
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn inflate(&self, m: f64) -> AxisBox {
        AxisBox {
            min: self.min.iter().map(|a| a - m).collect(),
            max: self.max.iter().map(|b| b + m).collect(),
        }
    }
}

/// Supported domain shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    /// Convex polygon, vertices counterclockwise.
    Polygon { vertices: Vec<[f64; 2]> },
    Box(AxisBox),
    Union(Vec<AxisBox>),
}

/// A bounded domain `Omega` with cached diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    shape: Shape,
    dim: usize,
    diameter: f64,
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.len() > 3 {
            return Err(Error::Domain("ball dimension must be in 1..=3".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain("ball radius must be positive".into()));
        }
        let dim = center.len();
        Ok(Self { shape: Shape::Ball { center, radius }, dim, diameter: 2.0 * radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![0.0; dim], 1.0).expect("valid unit ball")
    }

    pub fn axis_box(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        let b = AxisBox::new(min, max)?;
        let (dim, diameter) = (b.dim(), b.diameter());
        Ok(Self { shape: Shape::Box(b), dim, diameter })
    }

    pub fn unit_square() -> Self {
        Self::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).expect("valid unit square")
    }

    /// Convex polygon with counterclockwise vertices.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Domain("polygon needs at least 3 vertices".into()));
        }
        let area2: f64 = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if !(area2 > 0.0) {
            return Err(Error::Domain("polygon vertices must be counterclockwise".into()));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross < 0.0 {
                return Err(Error::Domain(format!("polygon is not convex at vertex {}", (i + 1) % n)));
            }
        }
        let mut diameter: f64 = 0.0;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        Ok(Self { shape: Shape::Polygon { vertices }, dim: 2, diameter })
    }

    pub fn union(boxes: Vec<AxisBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::Domain("empty union".into()));
        }
        let dim = boxes[0].dim();
        if boxes.iter().any(|b| b.dim() != dim) {
            return Err(Error::Domain("union boxes must share a dimension".into()));
        }
        let mut diameter: f64 = 0.0;
        let corners: Vec<Vec<f64>> = boxes.iter().flat_map(box_corners).collect();
        for a in &corners {
            for b in &corners {
                diameter = diameter.max(dist(a, b));
            }
        }
        Ok(Self { shape: Shape::Union(boxes), dim, diameter })
    }

    /// L-shaped union `[0,1] x [0,1/2]  U  [0,1/2] x [0,1]`; the two arms
    /// overlap in the square `[0,1/2]^2`.
    pub fn l_shape() -> Self {
        Self::union(vec![
            AxisBox::new(vec![0.0, 0.0], vec![1.0, 0.5]).expect("arm"),
            AxisBox::new(vec![0.0, 0.0], vec![0.5, 1.0]).expect("arm"),
        ])
        .expect("valid L-shape")
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Lebesgue measure (exact for every supported shape).
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => match self.dim {
                1 => 2.0 * radius,
                2 => std::f64::consts::PI * radius * radius,
                _ => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
            },
            Shape::Box(b) => b.volume(),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
            }
            Shape::Union(boxes) => union_volume(boxes),
        }
    }

    /// Euclidean distance from `x` to the closed domain, for convex shapes.
    pub fn convex_distance(&self, x: &[f64]) -> Option<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => Some((dist(x, center) - radius).max(0.0)),
            Shape::Box(b) => Some(b.distance(x)),
            Shape::Polygon { vertices } => {
                if self.contains(x) {
                    return Some(0.0);
                }
                let n = vertices.len();
                Some(
                    (0..n)
                        .map(|i| segment_distance(x, vertices[i], vertices[(i + 1) % n]))
                        .fold(f64::INFINITY, f64::min),
                )
            }
            Shape::Union(_) => None,
        }
    }

    /// Distance from an interior point to the boundary, for convex shapes.
    pub fn inner_depth(&self, x: &[f64]) -> Option<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => Some(radius - dist(x, center)),
            Shape::Box(b) => Some(
                b.min
                    .iter()
                    .zip(&b.max)
                    .zip(x)
                    .map(|((a, c), v)| (v - a).min(c - v))
                    .fold(f64::INFINITY, f64::min),
            ),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                Some(
                    (0..n)
                        .map(|i| edge_signed_distance(x, vertices[i], vertices[(i + 1) % n]))
                        .fold(f64::INFINITY, f64::min),
                )
            }
            Shape::Union(_) => None,
        }
    }

    /// Points on the boundary spaced about `pitch` apart (2-D), or a
    /// comparable density in 1-D/3-D.
    pub fn boundary_samples(&self, pitch: f64) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::Ball { center, radius } => match self.dim {
                1 => vec![vec![center[0] - radius], vec![center[0] + radius]],
                2 => {
                    let n = ((2.0 * std::f64::consts::PI * radius / pitch).ceil() as usize).max(8);
                    (0..n)
                        .map(|k| {
                            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                            vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                        })
                        .collect()
                }
                _ => {
                    let n = ((4.0 * std::f64::consts::PI * radius * radius / (pitch * pitch)).ceil()
                        as usize)
                        .max(32);
                    super::star::sphere_directions(3, n)
                        .into_iter()
                        .map(|u| (0..3).map(|i| center[i] + radius * u[i]).collect())
                        .collect()
                }
            },
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    let m = ((len / pitch).ceil() as usize).max(1);
                    for k in 0..m {
                        let t = k as f64 / m as f64;
                        out.push(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                out
            }
            Shape::Box(b) => box_boundary(b, pitch),
            Shape::Union(boxes) => {
                let probe = pitch * 1e-3;
                boxes
                    .iter()
                    .flat_map(|b| box_boundary(b, pitch))
                    .filter(|x| self.is_boundary_point(x, probe))
                    .collect()
            }
        }
    }

    fn is_boundary_point(&self, x: &[f64], probe: f64) -> bool {
        let mut y = x.to_vec();
        let n = 3usize.pow(self.dim as u32);
        for code in 0..n {
            let mut c = code;
            for k in 0..self.dim {
                y[k] = x[k] + probe * ((c % 3) as f64 - 1.0);
                c /= 3;
            }
            if !self.contains(&y) {
                return true;
            }
        }
        false
    }
}

impl Region for Domain {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                r2 <= radius * radius
            }
            Shape::Box(b) => b.contains(x),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0
                })
            }
            Shape::Union(boxes) => boxes.iter().any(|b| b.contains(x)),
        }
    }

    fn bbox(&self) -> AxisBox {
        match &self.shape {
            Shape::Ball { center, radius } => AxisBox {
                min: center.iter().map(|c| c - radius).collect(),
                max: center.iter().map(|c| c + radius).collect(),
            },
            Shape::Box(b) => b.clone(),
            Shape::Polygon { vertices } => {
                let mut min = vec![f64::INFINITY; 2];
                let mut max = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        min[k] = min[k].min(v[k]);
                        max[k] = max[k].max(v[k]);
                    }
                }
                AxisBox { min, max }
            }
            Shape::Union(boxes) => {
                let d = boxes[0].dim();
                let mut min = vec![f64::INFINITY; d];
                let mut max = vec![f64::NEG_INFINITY; d];
                for b in boxes {
                    for k in 0..d {
                        min[k] = min[k].min(b.min[k]);
                        max[k] = max[k].max(b.max[k]);
                    }
                }
                AxisBox { min, max }
            }
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn segment_distance(x: &[f64], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
}

fn edge_signed_distance(x: &[f64], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    (dx * (x[1] - a[1]) - dy * (x[0] - a[0])) / (dx * dx + dy * dy).sqrt()
}

fn box_corners(b: &AxisBox) -> Vec<Vec<f64>> {
    let d = b.dim();
    (0..1usize << d)
        .map(|m| (0..d).map(|k| if m >> k & 1 == 1 { b.max[k] } else { b.min[k] }).collect())
        .collect()
}

fn axis_points(a: f64, b: f64, pitch: f64) -> Vec<f64> {
    let m = (((b - a) / pitch).ceil() as usize).max(1);
    (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
}

fn box_boundary(b: &AxisBox, pitch: f64) -> Vec<Vec<f64>> {
    let d = b.dim();
    let axes: Vec<Vec<f64>> = (0..d).map(|k| axis_points(b.min[k], b.max[k], pitch)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let on_face = (0..d).any(|k| idx[k] == 0 || idx[k] == axes[k].len() - 1);
        if on_face {
            out.push((0..d).map(|k| axes[k][idx[k]]).collect());
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn union_volume(boxes: &[AxisBox]) -> f64 {
    let d = boxes[0].dim();
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); d];
    for b in boxes {
        for (k, c) in coords.iter_mut().enumerate() {
            c.push(b.min[k]);
            c.push(b.max[k]);
        }
    }
    for c in &mut coords {
        c.sort_by(f64::total_cmp);
        c.dedup();
    }
    let counts: Vec<usize> = coords.iter().map(|c| c.len() - 1).collect();
    let total: usize = counts.iter().product();
    let mut vol = 0.0;
    for cell in 0..total {
        let mut rest = cell;
        let mut mid = vec![0.0; d];
        let mut v = 1.0;
        for k in 0..d {
            let i = rest % counts[k];
            rest /= counts[k];
            mid[k] = 0.5 * (coords[k][i] + coords[k][i + 1]);
            v *= coords[k][i + 1] - coords[k][i];
        }
        if boxes.iter().any(|b| b.contains(&mid)) {
            vol += v;
        }
    }
    vol
}

/// Lattice points with `per_axis` nodes per axis over the bounding box of
/// the closed ball `B(center, radius)`, kept when inside the ball. The
/// center itself is always included.
pub fn ball_lattice(center: &[f64], radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    let m = per_axis.max(2);
    let total = m.pow(d as u32);
    let mut out = vec![center.to_vec()];
    for code in 0..total {
        let mut rest = code;
        let mut p = vec![0.0; d];
        for k in 0..d {
            let i = rest % m;
            rest /= m;
            p[k] = center[k] + radius * (-1.0 + 2.0 * i as f64 / (m - 1) as f64);
        }
        if dist(&p, center) <= radius && p != center {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters() {
        assert!((Domain::unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Domain::unit_ball(2).diameter(), 2.0);
        let tri = Domain::polygon(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        assert_eq!(tri.diameter(), 5.0);
        assert!((Domain::l_shape().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polygon_validation() {
        assert!(Domain::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(Domain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.5, 0.5], [0.0, 2.0]]).is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(Domain::l_shape().measure(), 0.75);
        assert!((Domain::unit_ball(2).measure() - std::f64::consts::PI).abs() < 1e-15);
        let tri = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(tri.measure(), 0.5);
    }

    #[test]
    fn l_shape_boundary_excludes_interior_seams() {
        let l = Domain::l_shape();
        let pts = l.boundary_samples(0.01);
        assert!(pts.iter().all(|p| !(p[0] > 0.01 && p[0] < 0.49 && p[1] > 0.01 && p[1] < 0.49)));
        assert!(pts.iter().any(|p| (p[0] - 0.75).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9));
        assert!(pts.iter().all(|p| l.contains(p)));
    }

    #[test]
    fn ball_lattice_is_inside() {
        let pts = ball_lattice(&[0.3, 0.2], 0.1, 9);
        assert!(pts.iter().all(|p| dist(p, &[0.3, 0.2]) <= 0.1));
        assert!(pts.len() > 40);
    }
}
