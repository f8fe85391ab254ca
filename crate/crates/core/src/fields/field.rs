use std::sync::Arc;

use super::fixture::FieldFixture;
use super::grid::Grid;
use crate::geometry::{Domain, Region};
use crate::{par, Error, Result};

/// A grid together with the set of nodes where fields may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    grid: Grid,
    domain: Domain,
    mask: Vec<bool>,
    omega: Vec<bool>,
    whole: bool,
}

impl GridDomain {
    /// Mask = nodes in the closure of `domain`.
    pub fn new(grid: Grid, domain: Domain) -> Result<Arc<Self>> {
        if grid.dim() != domain.dim() {
            return Err(Error::Domain("grid and domain dimensions differ".into()));
        }
        let mask = par::map(grid.len(), |i| domain.contains(&grid.point(i)));
        let omega = mask.clone();
        Ok(Arc::new(Self { grid, domain, mask, omega, whole: false }))
    }

    /// Every node active; `domain` is kept for reference.
    pub fn whole(grid: Grid, domain: Domain) -> Arc<Self> {
        let mask = vec![true; grid.len()];
        let omega = par::map(grid.len(), |i| domain.contains(&grid.point(i)));
        Arc::new(Self { grid, domain, mask, omega, whole: true })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Nodes in the closure of the domain (equal to the mask unless whole).
    pub fn omega(&self) -> &[bool] {
        &self.omega
    }

    pub fn is_whole(&self) -> bool {
        self.whole
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Measure of the active set under node quadrature.
    pub fn active_measure(&self) -> f64 {
        self.active_count() as f64 * self.grid.cell_volume()
    }

    /// Measure of the domain under node quadrature.
    pub fn omega_measure(&self) -> f64 {
        self.omega.iter().filter(|&&m| m).count() as f64 * self.grid.cell_volume()
    }
}

/// Grid values, zero off the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    gd: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps `values`, zeroing nodes off the mask.
    pub fn new(gd: Arc<GridDomain>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != gd.grid.len() {
            return Err(Error::Domain("value count does not match the grid".into()));
        }
        for (v, &m) in values.iter_mut().zip(&gd.mask) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(Self { gd, values })
    }

    pub fn zeros(gd: Arc<GridDomain>) -> Self {
        let n = gd.grid.len();
        Self { gd, values: vec![0.0; n] }
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64 + Sync>(gd: Arc<GridDomain>, f: F) -> Self {
        let g = &gd.grid;
        let values = par::map(g.len(), |i| if gd.mask[i] { f(&g.point(i)) } else { 0.0 });
        Self { gd, values }
    }

    pub fn gd(&self) -> &Arc<GridDomain> {
        &self.gd
    }

    pub fn grid(&self) -> &Grid {
        &self.gd.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> Self {
        let values = par::map(self.values.len(), |i| if self.gd.mask[i] { f(self.values[i]) } else { 0.0 });
        Self { gd: self.gd.clone(), values }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn zip_with<F: Fn(f64, f64) -> f64 + Sync + Send>(&self, other: &Self, f: F) -> Result<Self> {
        if self.gd.grid != other.gd.grid {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        let values = par::map(self.values.len(), |i| {
            if self.gd.mask[i] {
                f(self.values[i], other.values[i])
            } else {
                0.0
            }
        });
        Ok(Self { gd: self.gd.clone(), values })
    }

    /// Node-wise sum, on the mask of `self`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Same values restricted to another mask on the same grid.
    pub fn with_domain(&self, gd: Arc<GridDomain>) -> Result<Self> {
        if gd.grid != self.gd.grid {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        Self::new(gd, self.values.clone())
    }

    /// Node quadrature `sum v h^d` over the mask.
    pub fn integral(&self) -> f64 {
        let m = &self.gd.mask;
        par::sum(self.values.len(), |i| if m[i] { self.values[i] } else { 0.0 }) * self.grid().cell_volume()
    }
}

/// A list of channels on one grid domain (gradient components or the
/// components of a vector-valued function).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    gd: Arc<GridDomain>,
    channels: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(gd: Arc<GridDomain>, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() || channels.iter().any(|c| c.len() != gd.grid.len()) {
            return Err(Error::Domain("channel sizes do not match the grid".into()));
        }
        let channels = channels
            .into_iter()
            .map(|mut c| {
                for (v, &m) in c.iter_mut().zip(&gd.mask) {
                    if !m {
                        *v = 0.0;
                    }
                }
                c
            })
            .collect();
        Ok(Self { gd, channels })
    }

    pub fn from_components(components: &[ScalarField]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::Domain("no components".into()))?;
        if components.iter().any(|c| c.gd.grid != first.gd.grid) {
            return Err(Error::Domain("components live on different grids".into()));
        }
        Self::new(first.gd.clone(), components.iter().map(|c| c.values.clone()).collect())
    }

    pub fn gd(&self) -> &Arc<GridDomain> {
        &self.gd
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, k: usize) -> ScalarField {
        ScalarField { gd: self.gd.clone(), values: self.channels[k].clone() }
    }

    pub fn components(&self) -> Vec<ScalarField> {
        (0..self.channels.len()).map(|k| self.channel(k)).collect()
    }

    /// Euclidean norm over channels.
    pub fn magnitude(&self) -> ScalarField {
        let values = par::map(self.gd.grid.len(), |i| {
            self.channels.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()
        });
        ScalarField { gd: self.gd.clone(), values }
    }
}

/// Samples `fixture` at nodes inside the domain, zero elsewhere.
pub fn sample(fixture: &FieldFixture, gd: &Arc<GridDomain>) -> ScalarField {
    ScalarField::from_fn(gd.clone(), |x| fixture.eval(x))
}

/// Central differences at mask nodes on the zero-extended lattice; nodes
/// outside the grid count as zero.
pub fn gradient(field: &ScalarField) -> VectorField {
    let g = field.grid();
    let d = g.dim();
    let inv = 0.5 / g.h();
    let v = &field.values;
    let mask = &field.gd.mask;
    let channels = (0..d)
        .map(|k| {
            let stride = g.stride(k);
            let n = g.shape()[k];
            par::map(g.len(), |i| {
                if !mask[i] {
                    return 0.0;
                }
                let ik = g.unravel(i)[k];
                let up = if ik + 1 < n { v[i + stride] } else { 0.0 };
                let down = if ik > 0 { v[i - stride] } else { 0.0 };
                (up - down) * inv
            })
        })
        .collect();
    VectorField { gd: field.gd.clone(), channels }
}

/// `|grad u|` for a scalar field, or `sqrt(sum_i |grad u^i|^2)` over the
/// components of a vector field.
pub fn gradient_magnitude(components: &[ScalarField]) -> Result<ScalarField> {
    let first = components.first().ok_or_else(|| Error::Domain("no components".into()))?;
    let grads: Vec<VectorField> = components.iter().map(gradient).collect();
    let n = first.grid().len();
    let values = par::map(n, |i| {
        grads.iter().flat_map(|g| g.channels.iter()).map(|c| c[i] * c[i]).sum::<f64>().sqrt()
    });
    ScalarField::new(first.gd.clone(), values)
}

/// `T_k u`: values with `|v| > k` are replaced by `k sign(v)`, the rest are
/// kept as they are.
pub fn truncate(field: &ScalarField, k: f64) -> Result<ScalarField> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("truncation level must be positive, got {k}")));
    }
    Ok(field.map(|v| if v.abs() <= k { v } else { k * v.signum() }))
}

/// Maximum of `|v|` over the mask.
pub fn sup_norm(field: &ScalarField) -> f64 {
    let m = &field.gd.mask;
    par::max(field.values.len(), |i| if m[i] { field.values[i].abs() } else { 0.0 })
}

/// `(sum |v|^p h^d)^(1/p)` over the mask.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("lp_norm needs p >= 1, got {p}")));
    }
    let m = &field.gd.mask;
    let s = par::sum(field.values.len(), |i| if m[i] { field.values[i].abs().powf(p) } else { 0.0 });
    Ok((s * field.grid().cell_volume()).powf(1.0 / p))
}

/// Multilinear interpolation of node values; nodes outside the grid count
/// as zero.
pub fn interpolate(field: &ScalarField, x: &[f64]) -> f64 {
    interpolate_values(field.grid(), &field.values, x)
}

pub(crate) fn interpolate_values(g: &Grid, v: &[f64], x: &[f64]) -> f64 {
    let d = g.dim();
    let h = g.h();
    let mut base = [0i64; 3];
    let mut frac = [0.0; 3];
    for k in 0..d {
        let t = (x[k] - g.origin()[k]) / h;
        let f = t.floor();
        base[k] = f as i64;
        frac[k] = t - f;
    }
    let shape = g.shape();
    let mut total = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut idx = 0usize;
        let mut stride = 1usize;
        let mut inside = true;
        for k in 0..d {
            let bit = (corner >> k) & 1;
            let i = base[k] + bit as i64;
            if i < 0 || i >= shape[k] as i64 {
                inside = false;
                break;
            }
            w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            idx += i as usize * stride;
            stride *= shape[k];
        }
        if inside && w != 0.0 {
            total += w * v[idx];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Centering, Grid};

    fn square_gd(n: usize, centering: Centering) -> Arc<GridDomain> {
        let dom = Domain::unit_square();
        let g = Grid::covering(&dom.bbox(), n, 0.0, 0.1, centering).unwrap();
        GridDomain::new(g, dom).unwrap()
    }

    #[test]
    fn sample_constant_and_mask() {
        let gd = square_gd(16, Centering::Cell);
        let f = sample(&FieldFixture::Const(1.0), &gd);
        for i in 0..f.grid().len() {
            assert_eq!(f.values()[i], if gd.mask()[i] { 1.0 } else { 0.0 });
        }
        assert_eq!(lp_norm(&f, 2.0).unwrap(), 1.0);
        assert_eq!(gd.active_measure(), 1.0);
    }

    #[test]
    fn linear_gradient_is_exact_in_the_interior() {
        let gd = square_gd(32, Centering::Cell);
        let u = sample(&FieldFixture::Linear(vec![0.75, -0.5]), &gd);
        let g = gradient(&u);
        let h = gd.grid().h();
        for i in 0..gd.grid().len() {
            let x = gd.grid().point(i);
            if x.iter().all(|&c| c > h * 1.01 && c < 1.0 - h * 1.01) {
                assert!((g.channels()[0][i] - 0.75).abs() < 1e-12);
                assert!((g.channels()[1][i] + 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_gradient_is_second_order() {
        let err = |n: usize| {
            let gd = square_gd(n, Centering::Cell);
            let u = ScalarField::from_fn(gd.clone(), |x| (std::f64::consts::PI * x[0]).sin());
            let g = gradient(&u);
            let mut e: f64 = 0.0;
            for i in 0..gd.grid().len() {
                let x = gd.grid().point(i);
                if x.iter().all(|&c| c > 0.1 && c < 0.9) {
                    let exact = std::f64::consts::PI * (std::f64::consts::PI * x[0]).cos();
                    e = e.max((g.channels()[0][i] - exact).abs());
                }
            }
            e
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn truncation_examples() {
        let gd = square_gd(4, Centering::Cell);
        let u = ScalarField::from_fn(gd.clone(), |x| if x[0] < 0.5 { 3.0 } else { -3.0 });
        let t = truncate(&u, 2.0).unwrap();
        assert!(t.values().iter().all(|v| v.abs() <= 2.0));
        let s = ScalarField::from_fn(gd, |_| 1.5);
        assert_eq!(truncate(&s, 2.0).unwrap(), s);
        assert!(truncate(&s, 0.0).is_err());
    }

    #[test]
    fn half_indicator_l2() {
        let gd = square_gd(64, Centering::Cell);
        let f = ScalarField::from_fn(gd, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        assert!((lp_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1.0 / 64.0);
        assert_eq!(sup_norm(&f), 1.0);
    }

    #[test]
    fn interpolation_reproduces_bilinear() {
        let gd = square_gd(16, Centering::Vertex);
        let u = ScalarField::from_fn(gd, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]);
        for p in [[0.3, 0.4], [0.01, 0.99], [0.5, 0.5]] {
            let exact = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
            assert!((interpolate(&u, &p) - exact).abs() < 1e-12);
        }
        assert_eq!(interpolate(&u, &[5.0, 5.0]), 0.0);
    }

    #[test]
    fn masking_is_idempotent() {
        let gd = square_gd(16, Centering::Cell);
        let u = sample(&FieldFixture::Linear(vec![1.0, 1.0]), &gd);
        let again = ScalarField::new(gd, u.values().to_vec()).unwrap();
        assert_eq!(u, again);
    }

    #[test]
    fn vector_component_bounded_by_magnitude() {
        let gd = square_gd(16, Centering::Cell);
        let a = sample(&FieldFixture::Linear(vec![1.0, 2.0]), &gd);
        let b = ScalarField::from_fn(gd, |x| x[0] * x[1]);
        let full = gradient_magnitude(&[a.clone(), b.clone()]).unwrap();
        for part in [a, b] {
            let m = gradient(&part).magnitude();
            assert!(m.values().iter().zip(full.values()).all(|(x, y)| x <= y));
        }
    }
}
