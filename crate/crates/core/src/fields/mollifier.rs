use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::{GridDomain, ScalarField};
use crate::{par, Error, Result};

const RADIAL_INTERVALS: usize = 20_000;

/// Standard bump `eta(z) = exp(-1 / (1 - |z|^2))` on `|z| < 1`, scaled to
/// `eta_eps(x) = eps^-d eta(x / eps) / mass` with unit integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    epsilon: f64,
    dim: usize,
    unit_mass: f64,
}

fn profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// `|S^(d-1)|` for d = 1, 2, 3.
fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// `|S^(d-1)| * int_0^1 f(r) r^(d-1) dr` by composite Simpson.
fn radial_integral<F: Fn(f64) -> f64>(dim: usize, f: F) -> f64 {
    let n = RADIAL_INTERVALS;
    let dr = 1.0 / n as f64;
    let g = |r: f64| f(r) * r.powi(dim as i32 - 1);
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * dr);
    }
    sphere_area(dim) * s * dr / 3.0
}

impl Mollifier {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("mollifier radius must be positive, got {epsilon}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain("mollifier dimension must be in 1..=3".into()));
        }
        let unit_mass = radial_integral(dim, |r| profile(r * r));
        Ok(Self { epsilon, dim, unit_mass })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `int eta` of the unnormalized profile.
    pub fn unit_mass(&self) -> f64 {
        self.unit_mass
    }

    /// `eta_eps(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (self.epsilon * self.epsilon);
        profile(r2) / (self.unit_mass * self.epsilon.powi(self.dim as i32))
    }

    /// `grad eta_eps(x)`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let e = self.epsilon;
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (e * e);
        if r2 >= 1.0 {
            return vec![0.0; x.len()];
        }
        let c = -2.0 * profile(r2) / ((1.0 - r2) * (1.0 - r2));
        let scale = c / (self.unit_mass * e.powi(self.dim as i32 + 2));
        x.iter().map(|v| scale * v).collect()
    }

    /// `||eta||_{p'}` of the unit-radius normalized kernel.
    pub fn unit_lp_norm(&self, p_prime: f64) -> f64 {
        let m = self.unit_mass;
        radial_integral(self.dim, |r| (profile(r * r) / m).powf(p_prime)).powf(1.0 / p_prime)
    }

    /// `||grad eta||_1` of the unit-radius normalized kernel.
    pub fn unit_grad_l1(&self) -> f64 {
        let m = self.unit_mass;
        radial_integral(self.dim, |r| {
            let r2 = r * r;
            if r2 >= 1.0 {
                0.0
            } else {
                2.0 * r * profile(r2) / ((1.0 - r2) * (1.0 - r2) * m)
            }
        })
    }

    /// Lattice quadrature of `int eta_eps` with nodes `j * pitch`.
    pub fn lattice_mass(&self, pitch: f64) -> f64 {
        let (offsets, _) = lattice_offsets(self.epsilon, pitch, self.dim);
        let vol = pitch.powi(self.dim as i32);
        offsets.iter().map(|o| self.eval(&o.map(|j| j as f64 * pitch)[..self.dim])).sum::<f64>() * vol
    }
}

/// Integer offsets `j` with `|j pitch| < eps`, in a fixed order.
fn lattice_offsets(eps: f64, pitch: f64, dim: usize) -> (Vec<[i64; 3]>, i64) {
    let r = (eps / pitch).ceil() as i64;
    let mut out = Vec::new();
    let lim2 = (eps / pitch) * (eps / pitch);
    let range = |k: usize| if k < dim { -r..=r } else { 0..=0 };
    for j2 in range(2) {
        for j1 in range(1) {
            for j0 in range(0) {
                let n2 = (j0 * j0 + j1 * j1 + j2 * j2) as f64;
                if n2 < lim2 {
                    out.push([j0, j1, j2]);
                }
            }
        }
    }
    (out, r)
}

/// Kernel offsets `y = j pitch` inside the open `eps`-ball with weights
/// `eta_eps(y)` normalized to sum exactly to one.
pub(crate) fn kernel_quadrature(eta: &Mollifier, pitch: f64) -> (Vec<[i64; 3]>, Vec<f64>) {
    let (offsets, _) = lattice_offsets(eta.epsilon, pitch, eta.dim);
    let raw: Vec<f64> = offsets
        .iter()
        .map(|o| eta.eval(&o.map(|j| j as f64 * pitch)[..eta.dim]))
        .collect();
    let total: f64 = raw.iter().sum();
    (offsets, raw.into_iter().map(|w| w / total).collect())
}

/// Grid-measured dual norms of `eta_eps` next to their scaling predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualNorms {
    pub epsilon: f64,
    pub h: f64,
    pub p: f64,
    pub grad_l1: f64,
    pub lp_prime: f64,
    /// `eps^-1 ||grad eta||_1`.
    pub predicted_grad_l1: f64,
    /// `eps^(-d/p) ||eta||_{p'}`.
    pub predicted_lp_prime: f64,
    pub warning: Option<String>,
}

/// `||grad eta_eps||_1` and `||eta_eps||_{p'}` by lattice quadrature with
/// spacing `h`.
pub fn mollifier_dual_norms(eta: &Mollifier, h: f64, p: f64) -> Result<DualNorms> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("dual norms need 1 < p < inf, got {p}")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain("lattice spacing must be positive".into()));
    }
    let pp = p / (p - 1.0);
    let d = eta.dim;
    let e = eta.epsilon;
    let (offsets, _) = lattice_offsets(e, h, d);
    let vol = h.powi(d as i32);
    let pts: Vec<Vec<f64>> = offsets.iter().map(|o| (0..d).map(|k| o[k] as f64 * h).collect()).collect();
    let grad_l1 = par::sum(pts.len(), |i| eta.grad(&pts[i]).iter().map(|g| g * g).sum::<f64>().sqrt()) * vol;
    let lp_prime = (par::sum(pts.len(), |i| eta.eval(&pts[i]).powf(pp)) * vol).powf(1.0 / pp);
    let warning = (e / h < 20.0).then(|| format!("eps/h = {:.2} is below 20; quadrature may be biased", e / h));
    Ok(DualNorms {
        epsilon: e,
        h,
        p,
        grad_l1,
        lp_prime,
        predicted_grad_l1: eta.unit_grad_l1() / e,
        predicted_lp_prime: e.powf(-(d as f64) / p) * eta.unit_lp_norm(pp),
        warning,
    })
}

/// Direct lattice convolution `sum_j w_j u(x - j h)` with discretely
/// normalized weights; the result lives on the whole grid.
pub fn convolve(field: &ScalarField, eta: &Mollifier) -> Result<ScalarField> {
    let g = field.grid();
    let h = g.h();
    if eta.epsilon < 2.0 * h {
        return Err(Error::Resolution(format!("kernel radius {} is below 2h = {}", eta.epsilon, 2.0 * h)));
    }
    if eta.dim != g.dim() {
        return Err(Error::Domain("kernel and grid dimensions differ".into()));
    }
    let (offsets, weights) = kernel_quadrature(eta, h);
    let r = (eta.epsilon / h).ceil() as usize;
    let d = g.dim();
    let shape = g.shape();
    let v = field.values();
    for (i, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            let m = g.unravel(i);
            if (0..d).any(|k| m[k] < r || m[k] + r >= shape[k]) {
                return Err(Error::Resolution("field support plus kernel radius exceeds the grid".into()));
            }
        }
    }
    let strides: Vec<i64> = (0..d).map(|k| g.stride(k) as i64).collect();
    let lin: Vec<i64> = offsets.iter().map(|o| (0..d).map(|k| o[k] * strides[k]).sum()).collect();
    let values = par::map(g.len(), |i| {
        let m = g.unravel(i);
        if (0..d).any(|k| m[k] < r || m[k] + r >= shape[k]) {
            return 0.0;
        }
        let mut s = 0.0;
        for (off, w) in lin.iter().zip(&weights) {
            s += w * v[(i as i64 - off) as usize];
        }
        s
    });
    let gd: Arc<GridDomain> = GridDomain::whole(g.clone(), field.gd().domain().clone());
    ScalarField::new(gd, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, Centering, FieldFixture, Grid};
    use crate::geometry::{Domain, Region};

    #[test]
    fn unit_mass_matches_known_constants() {
        // int_{R^2} eta = pi * E where E = int_0^1 2r exp(-1/(1-r^2)) dr
        let m2 = Mollifier::new(0.1, 2).unwrap().unit_mass();
        assert!((m2 - 0.466_512_393_178_330_1).abs() < 1e-9, "{m2}");
        let m1 = Mollifier::new(0.1, 1).unwrap().unit_mass();
        assert!((m1 - 0.443_993_816_168_079_4).abs() < 1e-9, "{m1}");
    }

    #[test]
    fn eval_scaling_and_support() {
        let eta = Mollifier::new(0.2, 2).unwrap();
        assert_eq!(eta.eval(&[0.2, 0.0]), 0.0);
        let center = eta.eval(&[0.0, 0.0]);
        assert!((center - (-1.0f64).exp() / (eta.unit_mass() * 0.04)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let eta = Mollifier::new(0.3, 2).unwrap();
        let x = [0.1, -0.05];
        let g = eta.grad(&x);
        let dh = 1e-6;
        let fd = (eta.eval(&[x[0] + dh, x[1]]) - eta.eval(&[x[0] - dh, x[1]])) / (2.0 * dh);
        assert!((g[0] - fd).abs() < 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn lattice_mass_is_one() {
        let eta = Mollifier::new(0.1, 2).unwrap();
        // the raw lattice sum is only close to one; discrete normalization makes it exact
        assert!((eta.lattice_mass(0.1 / 8.0) - 1.0).abs() < 1e-3);
        let (_, w) = kernel_quadrature(&eta, 0.1 / 8.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_norm_scaling() {
        for eps in [0.1, 0.05] {
            let eta = Mollifier::new(eps, 2).unwrap();
            let n = mollifier_dual_norms(&eta, eps / 20.0, 3.0).unwrap();
            assert!(n.warning.is_none());
            let r1 = n.lp_prime / n.predicted_lp_prime;
            let r2 = n.grad_l1 / n.predicted_grad_l1;
            assert!((0.98..=1.02).contains(&r1), "{r1}");
            assert!((0.98..=1.02).contains(&r2), "{r2}");
        }
        let eta = Mollifier::new(0.1, 2).unwrap();
        assert!(mollifier_dual_norms(&eta, 0.01, 3.0).unwrap().warning.is_some());
        assert!(mollifier_dual_norms(&eta, 0.005, 1.0).is_err());
    }

    fn big_square(n: usize) -> Arc<GridDomain> {
        let dom = Domain::axis_box(vec![-1.0, -1.0], vec![2.0, 2.0]).unwrap();
        let g = Grid::covering(&dom.bbox(), n, 0.0, 0.0, Centering::Cell).unwrap();
        GridDomain::new(g, dom).unwrap()
    }

    #[test]
    fn convolution_preserves_constants_and_linears() {
        let gd = big_square(96);
        let eta = Mollifier::new(0.125, 2).unwrap();
        let one = ScalarField::from_fn(gd.clone(), |x| {
            if x.iter().all(|c| (-0.5..=1.5).contains(c)) {
                1.0 + 0.3 * x[0] - 0.2 * x[1]
            } else {
                0.0
            }
        });
        let out = convolve(&one, &eta).unwrap();
        for i in 0..gd.grid().len() {
            let x = gd.grid().point(i);
            if x.iter().all(|c| (0.0..=1.0).contains(c)) {
                assert!((out.values()[i] - one.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_reproduces_kernel() {
        let gd = big_square(60);
        let g = gd.grid().clone();
        let center = g.len() / 2 + g.shape()[0] / 2;
        let mut v = vec![0.0; g.len()];
        v[center] = 1.0;
        let f = ScalarField::new(gd, v).unwrap();
        let eta = Mollifier::new(0.2, 2).unwrap();
        let out = convolve(&f, &eta).unwrap();
        let c = g.point(center);
        let mass = eta.lattice_mass(g.h());
        for i in 0..g.len() {
            let x = g.point(i);
            let y = [x[0] - c[0], x[1] - c[1]];
            let expected = if (y[0] * y[0] + y[1] * y[1]).sqrt() < 0.2 - 1e-12 {
                eta.eval(&y) / mass * g.cell_volume()
            } else {
                0.0
            };
            assert!((out.values()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_rejects_coarse_kernel_and_edge_support() {
        let gd = big_square(30);
        let f = sample(&FieldFixture::Const(1.0), &gd);
        assert!(matches!(convolve(&f, &Mollifier::new(0.15, 2).unwrap()), Err(Error::Resolution(_))));
        assert!(matches!(convolve(&f, &Mollifier::new(0.5, 2).unwrap()), Err(Error::Resolution(_))));
    }
}
