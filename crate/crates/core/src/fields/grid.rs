use serde::{Deserialize, Serialize};

use crate::geometry::AxisBox;
use crate::{Error, Result};

/// Placement of nodes relative to the cells of the bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Centering {
    /// Nodes at cell midpoints; node sums with weight `h^d` are midpoint rules.
    Cell,
    /// Nodes at cell corners, so axis-aligned boundaries carry nodes.
    Vertex,
}

/// Uniform tensor grid; node `i` sits at `origin + i h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    centering: Centering,
}

impl Grid {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>, centering: Centering) -> Result<Self> {
        if origin.is_empty() || origin.len() > 3 || origin.len() != shape.len() {
            return Err(Error::Domain("grid dimension must be in 1..=3".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("grid spacing must be positive, got {h}")));
        }
        if shape.iter().any(|&n| n < 3) {
            return Err(Error::Domain("grid needs at least 3 nodes per axis".into()));
        }
        Ok(Self { origin, h, shape, centering })
    }

    /// Grid over `bbox` with `n` cells across its longest extent (or spacing
    /// `h`; a zero selects the other) and at least `pad` of padding, rounded
    /// up to whole cells with a minimum of one.
    pub fn covering(bbox: &AxisBox, n: usize, h: f64, pad: f64, centering: Centering) -> Result<Self> {
        let widths = bbox.widths();
        let longest = widths.iter().cloned().fold(0.0, f64::max);
        let h = match (n, h > 0.0) {
            (0, false) => return Err(Error::Domain("grid needs n or h".into())),
            (0, true) => h,
            (n, false) => longest / n as f64,
            (n, true) => {
                if ((longest / n as f64) - h).abs() > 1e-9 * h {
                    return Err(Error::Domain(format!(
                        "grid n = {n} and h = {h} disagree for extent {longest}"
                    )));
                }
                h
            }
        };
        if !(pad >= 0.0) {
            return Err(Error::Domain("grid padding must be nonnegative".into()));
        }
        let pad_cells = ((pad / h - 1e-9).ceil() as usize).max(1);
        let cells: Vec<usize> = widths.iter().map(|w| ((w / h - 1e-9).ceil() as usize).max(1)).collect();
        let (shift, extra) = match centering {
            Centering::Cell => (0.5 * h, 0),
            Centering::Vertex => (0.0, 1),
        };
        let origin = bbox.min.iter().map(|m| m - pad_cells as f64 * h + shift).collect();
        let shape = cells.iter().map(|c| c + extra + 2 * pad_cells).collect();
        Self::new(origin, h, shape, centering)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Linear offset of one step along `axis` (axis 0 varies fastest).
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[..axis].iter().product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h
    }

    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (k, &n) in self.shape.iter().enumerate() {
            out[k] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for k in (0..self.dim()).rev() {
            idx = idx * self.shape[k] + multi[k];
        }
        idx
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let m = self.unravel(idx);
        (0..self.dim()).map(|k| self.coord(k, m[k])).collect()
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        let m = self.unravel(idx);
        for k in 0..self.dim() {
            out[k] = self.coord(k, m[k]);
        }
    }

    /// Axis-aligned box spanned by the nodes.
    pub fn node_box(&self) -> AxisBox {
        AxisBox {
            min: self.origin.clone(),
            max: (0..self.dim()).map(|k| self.coord(k, self.shape[k] - 1)).collect(),
        }
    }

    /// Index range per axis of the nodes inside `[lo, hi]`, clipped to the grid.
    pub fn index_window(&self, lo: &[f64], hi: &[f64]) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let a = ((lo[k] - self.origin[k]) / self.h).ceil().max(0.0);
            let b = ((hi[k] - self.origin[k]) / self.h).floor().min((self.shape[k] - 1) as f64);
            if a > b {
                return None;
            }
            out.push((a as usize, b as usize));
        }
        Some(out)
    }
}
