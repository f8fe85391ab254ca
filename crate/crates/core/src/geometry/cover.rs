use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::domain::{ball_lattice, AxisBox, Domain, Region, Shape};
use crate::fields::{Grid, GridDomain, ScalarField};
use crate::{par, Error, Result};

/// Fraction of the smallest box width used to inflate a piece into `U_i`.
const INFLATE_FRACTION: f64 = 0.25;

/// One star-shaped piece: `U_i = {x : dist(x, region) < inflate}` and the
/// ball `B_radius(center)` with respect to which `Omega ∩ U_i` is star-shaped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverPiece {
    pub region: Domain,
    pub inflate: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl CoverPiece {
    /// `inflate - dist(x, region)`; positive exactly on `U_i`.
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.inflate - self.region.convex_distance(x).expect("convex cover region")
    }

    pub fn in_u(&self, x: &[f64]) -> bool {
        self.depth(x) > 0.0
    }
}

/// `Omega ∩ U_i` as a region.
pub struct PieceRegion<'a> {
    pub omega: &'a Domain,
    pub piece: &'a CoverPiece,
}

impl Region for PieceRegion<'_> {
    fn dim(&self) -> usize {
        self.omega.dim()
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.omega.contains(x) && self.piece.in_u(x)
    }

    fn bbox(&self) -> AxisBox {
        let u = self.piece.region.bbox().inflate(self.piece.inflate);
        self.omega.bbox().intersect(&u).unwrap_or(u)
    }
}

/// Finite cover of `closure(Omega)` by pieces `U_i` with common radius
/// `R = min R_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarCover {
    pub domain: Domain,
    pub pieces: Vec<CoverPiece>,
    pub r: f64,
}

/// Sampled verification of the cover invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub pitch: f64,
    pub points_checked: usize,
    pub uncovered: Option<Vec<f64>>,
    pub ball_escape: Option<(usize, Vec<f64>)>,
}

impl CoverCheck {
    pub fn pass(&self) -> bool {
        self.uncovered.is_none() && self.ball_escape.is_none()
    }
}

impl StarCover {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_region(&self, i: usize) -> PieceRegion<'_> {
        PieceRegion { omega: &self.domain, piece: &self.pieces[i] }
    }

    /// Checks that sampled points of `closure(Omega)` lie in some `U_i` and
    /// that each ball lies in `Omega ∩ U_i`.
    pub fn check(&self, pitch: f64) -> CoverCheck {
        let bb = self.domain.bbox();
        let d = bb.dim();
        let counts: Vec<usize> = bb.widths().iter().map(|w| (w / pitch).ceil() as usize + 1).collect();
        let total: usize = counts.iter().product();
        let mut pts = self.domain.boundary_samples(pitch);
        for code in 0..total {
            let mut rest = code;
            let mut p = vec![0.0; d];
            for k in 0..d {
                let i = rest % counts[k];
                rest /= counts[k];
                p[k] = (bb.min[k] + i as f64 * pitch).min(bb.max[k]);
            }
            if self.domain.contains(&p) {
                pts.push(p);
            }
        }
        let uncovered = pts.iter().find(|p| !self.pieces.iter().any(|c| c.in_u(p))).cloned();
        let mut ball_escape = None;
        for (i, piece) in self.pieces.iter().enumerate() {
            let region = self.piece_region(i);
            let per_axis = ((2.0 * piece.radius / pitch).ceil() as usize).clamp(3, 64);
            if let Some(p) = ball_lattice(&piece.center, piece.radius * (1.0 - 1e-9), per_axis)
                .into_iter()
                .find(|p| !region.contains(p))
            {
                ball_escape = Some((i, p));
                break;
            }
        }
        CoverCheck { pitch, points_checked: pts.len(), uncovered, ball_escape }
    }
}

/// Largest inscribed ball of a convex polygon by coarse-to-fine search.
fn polygon_chebyshev(domain: &Domain) -> (Vec<f64>, f64) {
    let bb = domain.bbox();
    let (mut lo, mut hi) = (bb.min.clone(), bb.max.clone());
    let mut best = (bb.center(), f64::NEG_INFINITY);
    let n = 32;
    for _ in 0..12 {
        for i in 0..=n {
            for j in 0..=n {
                let p = vec![
                    lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                ];
                let depth = domain.inner_depth(&p).unwrap_or(f64::NEG_INFINITY);
                if depth > best.1 {
                    best = (p, depth);
                }
            }
        }
        for k in 0..2 {
            let half = 2.0 * (hi[k] - lo[k]) / n as f64;
            lo[k] = best.0[k] - half;
            hi[k] = best.0[k] + half;
        }
    }
    best
}

/// Star-shaped cover of a ball, convex polygon, box, or union of
/// overlapping boxes.
pub fn build_cover(domain: &Domain) -> Result<StarCover> {
    let pieces = match domain.shape() {
        Shape::Ball { center, radius } => vec![CoverPiece {
            region: domain.clone(),
            inflate: INFLATE_FRACTION * 2.0 * radius,
            center: center.clone(),
            radius: *radius,
        }],
        Shape::Box(b) => vec![CoverPiece {
            region: domain.clone(),
            inflate: INFLATE_FRACTION * b.min_width(),
            center: b.center(),
            radius: 0.5 * b.min_width(),
        }],
        Shape::Polygon { .. } => {
            let (center, radius) = polygon_chebyshev(domain);
            vec![CoverPiece {
                region: domain.clone(),
                inflate: INFLATE_FRACTION * domain.bbox().min_width(),
                center,
                radius,
            }]
        }
        Shape::Union(boxes) => union_pieces(boxes)?,
    };
    let r = pieces.iter().map(|p| p.radius).fold(f64::INFINITY, f64::min);
    Ok(StarCover { domain: domain.clone(), pieces, r })
}

/// One piece per box. The ball of piece `i` is the inscribed ball of
/// `box_i` intersected with every box meeting `U_i`, so every convex part of
/// `Omega ∩ U_i` contains it.
fn union_pieces(boxes: &[AxisBox]) -> Result<Vec<CoverPiece>> {
    let mut out = Vec::with_capacity(boxes.len());
    for (i, b) in boxes.iter().enumerate() {
        let inflate = INFLATE_FRACTION * b.min_width();
        let mut core = b.clone();
        for (j, other) in boxes.iter().enumerate() {
            if j != i && b.box_distance(other) < inflate {
                core = core.intersect(other).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "box {i} and its neighbours have no common interior for a star center"
                    ))
                })?;
            }
        }
        out.push(CoverPiece {
            region: Domain::axis_box(b.min.clone(), b.max.clone())?,
            inflate,
            center: core.center(),
            radius: 0.5 * core.min_width(),
        });
    }
    Ok(out)
}

/// Weights `theta_i` on the whole grid, one per cover piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    pub smoothing: f64,
    pub weights: Vec<ScalarField>,
}

impl PartitionOfUnity {
    /// Largest `|sum_i theta_i - 1|` over nodes of `closure(Omega)`.
    pub fn sum_defect(&self, omega_mask: &[bool]) -> f64 {
        let n = omega_mask.len();
        par::max(n, |k| {
            if omega_mask[k] {
                (self.weights.iter().map(|w| w.values()[k]).sum::<f64>() - 1.0).abs()
            } else {
                0.0
            }
        })
    }
}

/// `theta_i = chi_i / sum_j chi_j` where `chi_i` is the lattice-mollified
/// (radius `s`) indicator of `{depth_i >= 2 s}`.
pub fn build_partition(cover: &StarCover, grid: &Grid, smoothing: f64) -> Result<PartitionOfUnity> {
    let s = smoothing;
    let h = grid.h();
    if s < 2.0 * h {
        return Err(Error::Resolution(format!("smoothing radius {s} is below 2h = {}", 2.0 * h)));
    }
    for (i, p) in cover.pieces.iter().enumerate() {
        if 2.0 * s > p.inflate {
            return Err(Error::Precondition(format!(
                "smoothing radius {s} exceeds half the inflation {} of piece {i}",
                p.inflate
            )));
        }
    }
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            if let (Shape::Box(a), Shape::Box(b)) =
                (cover.pieces[i].region.shape(), cover.pieces[j].region.shape())
            {
                if let Some(overlap) = a.intersect(b) {
                    let w = overlap.min_width();
                    if s >= 0.5 * w {
                        return Err(Error::Precondition(format!(
                            "overlap of pieces {i} and {j} has width {w}, too thin for smoothing radius {s}"
                        )));
                    }
                }
            }
        }
    }
    let d = grid.dim();
    let r = (s / h).ceil() as i64;
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    for j2 in if d > 2 { -r..=r } else { 0..=0 } {
        for j1 in if d > 1 { -r..=r } else { 0..=0 } {
            for j0 in -r..=r {
                let y = [j0 as f64 * h, j1 as f64 * h, j2 as f64 * h];
                let n2 = y.iter().map(|v| v * v).sum::<f64>() / (s * s);
                if n2 < 1.0 {
                    offsets.push(y);
                    raw.push((-1.0 / (1.0 - n2)).exp());
                }
            }
        }
    }
    let total: f64 = raw.iter().sum();
    let kernel: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let chis: Vec<Vec<f64>> = cover
        .pieces
        .iter()
        .map(|piece| {
            par::map(grid.len(), |k| {
                let x = grid.point(k);
                let mut z = vec![0.0; d];
                let mut acc = 0.0;
                for (y, w) in offsets.iter().zip(&kernel) {
                    for c in 0..d {
                        z[c] = x[c] - y[c];
                    }
                    if piece.depth(&z) >= 2.0 * s {
                        acc += w;
                    }
                }
                acc
            })
        })
        .collect();
    let omega = GridDomain::new(grid.clone(), cover.domain.clone())?;
    let sum: Vec<f64> = (0..grid.len()).map(|k| chis.iter().map(|c| c[k]).sum()).collect();
    if let Some(k) = (0..grid.len()).find(|&k| omega.mask()[k] && sum[k] <= 0.0) {
        return Err(Error::Precondition(format!(
            "partition weights vanish at node {:?} of the domain",
            grid.point(k)
        )));
    }
    let whole = GridDomain::whole(grid.clone(), cover.domain.clone());
    let weights = chis
        .into_iter()
        .map(|c| {
            let v = c.iter().zip(&sum).map(|(a, t)| if *t > 0.0 { a / t } else { 0.0 }).collect();
            ScalarField::new(Arc::clone(&whole), v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionOfUnity { smoothing: s, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Centering;
    use crate::geometry::is_star_shaped;

    #[test]
    fn single_piece_covers() {
        let c = build_cover(&Domain::unit_ball(2)).unwrap();
        assert_eq!((c.len(), c.r), (1, 1.0));
        let s = build_cover(&Domain::unit_square()).unwrap();
        assert_eq!(s.r, 0.5);
        assert_eq!(s.pieces[0].center, vec![0.5, 0.5]);
        assert!(s.check(0.02).pass());
    }

    #[test]
    fn polygon_inscribed_ball() {
        // right triangle with legs 3, 4: inradius 1 at (1, 1)
        let tri = Domain::polygon(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        let c = build_cover(&tri).unwrap();
        assert!((c.r - 1.0).abs() < 1e-6, "{}", c.r);
        assert!((c.pieces[0].center[0] - 1.0).abs() < 1e-5);
        assert!(c.check(0.05).pass());
    }

    #[test]
    fn l_shape_cover_is_star_shaped() {
        let l = Domain::l_shape();
        let c = build_cover(&l).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.r, 0.25);
        assert!(c.check(0.01).pass());
        for i in 0..2 {
            let p = &c.pieces[i];
            let rep = is_star_shaped(&c.piece_region(i), &p.center, p.radius, 48, 2e-3).unwrap();
            assert!(rep.star_shaped, "piece {i}: {rep:?}");
        }
    }

    #[test]
    fn disjoint_neighbour_is_unsupported() {
        let u = Domain::union(vec![
            AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            AxisBox::new(vec![1.1, 0.0], vec![2.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(build_cover(&u), Err(Error::Unsupported(_))));
    }

    fn grid_for(d: &Domain, n: usize) -> Grid {
        Grid::covering(&d.bbox(), n, 0.0, 0.3, Centering::Cell).unwrap()
    }

    #[test]
    fn single_piece_partition_is_one() {
        let sq = Domain::unit_square();
        let cover = build_cover(&sq).unwrap();
        let g = grid_for(&sq, 32);
        let pou = build_partition(&cover, &g, 4.0 * g.h()).unwrap();
        let omega = GridDomain::new(g.clone(), sq).unwrap();
        for k in 0..g.len() {
            if omega.mask()[k] {
                assert_eq!(pou.weights[0].values()[k], 1.0);
            }
        }
    }

    #[test]
    fn l_shape_partition_invariants() {
        let l = Domain::l_shape();
        let cover = build_cover(&l).unwrap();
        let g = grid_for(&l, 64);
        let s = 4.0 * g.h();
        let pou = build_partition(&cover, &g, s).unwrap();
        let omega = GridDomain::new(g.clone(), l).unwrap();
        assert!(pou.sum_defect(omega.mask()) < 1e-10);
        for (i, w) in pou.weights.iter().enumerate() {
            for k in 0..g.len() {
                let v = w.values()[k];
                assert!((0.0..=1.0).contains(&v));
                if v > 0.0 {
                    assert!(cover.pieces[i].depth(&g.point(k)) >= s - 1e-12);
                }
            }
        }
        // symmetry across the diagonal
        for k in 0..g.len() {
            let x = g.point(k);
            if x[0] == x[1] && omega.mask()[k] {
                assert!((pou.weights[0].values()[k] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thin_overlap_is_named() {
        let l = Domain::l_shape();
        let cover = build_cover(&l).unwrap();
        let g = grid_for(&l, 32);
        let err = build_partition(&cover, &g, 0.07).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let thin = Domain::union(vec![
            AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            AxisBox::new(vec![0.95, 0.0], vec![2.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let c = build_cover(&thin).unwrap();
        let g = grid_for(&thin, 100);
        let msg = build_partition(&c, &g, 0.04).unwrap_err().to_string();
        assert!(msg.contains("pieces 0 and 1"), "{msg}");
    }
}
