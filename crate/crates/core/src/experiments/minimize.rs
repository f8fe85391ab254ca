//! Discrete minimization of `sum psi(x, |grad u|) h^d` with prescribed
//! boundary values.
//!
//! The discrete gradient averages forward and backward differences in the
//! energy, `(1/2) sum psi(|D+ u|) + (1/2) sum psi(|D- u|)`, which has no
//! checkerboard null space and reduces to the 5-point Laplacian for
//! `psi = xi^2`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::fields::{Grid, ScalarField};
use crate::nfunctions::NFunction;
use crate::{par, Error, Result};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop once `max |u_{k+1} - u_k| <= step_tol`.
    pub step_tol: f64,
    /// Descent uses `psi(sqrt(xi^2 + mu^2)) - psi(mu)`.
    pub mu: f64,
    /// Number of stored L-BFGS pairs.
    pub memory: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 5000, step_tol: 1e-10, mu: 1e-8, memory: 10, initial_step: 1.0, shrink: 0.5, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    StepTolerance,
    MaxIterations,
    /// No step along steepest descent decreases the objective.
    Stalled,
    /// Nothing to optimize.
    NoFreeNodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub minimizer: ScalarField,
    /// Unsmoothed objective at the minimizer.
    pub objective: f64,
    /// Smoothed descent objective after each accepted step, starting at `u0`.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub stop: StopReason,
    /// Hash of the boundary values, in hex.
    pub boundary_id: String,
}

/// Nodes entering the energy and the free (interior) nodes.
pub(crate) struct Stencil {
    pub(crate) free: Vec<bool>,
    fwd: Vec<usize>,
    bwd: Vec<usize>,
    strides: Vec<usize>,
    h: f64,
    weight: f64,
}

impl Stencil {
    pub(crate) fn new(grid: &Grid, mask: &[bool]) -> Self {
        let d = grid.dim();
        let strides: Vec<usize> = (0..d).map(|k| grid.stride(k)).collect();
        let shape = grid.shape();
        let has = |i: usize, k: usize, up: bool| {
            let ik = grid.unravel(i)[k];
            if up {
                ik + 1 < shape[k] && mask[i + strides[k]]
            } else {
                ik > 0 && mask[i - strides[k]]
            }
        };
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        let mut free = vec![false; grid.len()];
        for i in 0..grid.len() {
            if !mask[i] {
                continue;
            }
            let f = (0..d).all(|k| has(i, k, true));
            let b = (0..d).all(|k| has(i, k, false));
            if f {
                fwd.push(i);
            }
            if b {
                bwd.push(i);
            }
            free[i] = f && b;
        }
        Self { free, fwd, bwd, strides, h: grid.h(), weight: 0.5 * grid.cell_volume() }
    }

    fn diff(&self, v: &[f64], i: usize, k: usize, up: bool) -> f64 {
        let s = self.strides[k];
        if up {
            (v[i + s] - v[i]) / self.h
        } else {
            (v[i] - v[i - s]) / self.h
        }
    }

    fn norm(&self, v: &[f64], i: usize, up: bool) -> f64 {
        (0..self.strides.len()).map(|k| self.diff(v, i, k, up).powi(2)).sum::<f64>().sqrt()
    }

    /// Unsmoothed energy.
    pub(crate) fn energy(&self, spec: &dyn NFunction, grid: &Grid, v: &[f64]) -> f64 {
        let part = |nodes: &[usize], up: bool| {
            let terms = par::map(nodes.len(), |j| {
                let i = nodes[j];
                spec.eval(&grid.point(i), self.norm(v, i, up))
            });
            terms.iter().sum::<f64>()
        };
        self.weight * (part(&self.fwd, true) + part(&self.bwd, false))
    }

    /// Smoothed energy and its gradient; fixed nodes get zero gradient.
    fn energy_grad(&self, spec: &dyn NFunction, grid: &Grid, v: &[f64], mu: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; v.len()];
        let mut total = 0.0;
        for (nodes, up) in [(&self.fwd, true), (&self.bwd, false)] {
            let terms = par::map(nodes.len(), |j| {
                let i = nodes[j];
                let x = grid.point(i);
                let xi = self.norm(v, i, up);
                let s = (xi * xi + mu * mu).sqrt();
                (spec.eval(&x, s) - spec.eval(&x, mu), spec.deriv(&x, s) / s)
            });
            for (j, &(phi, w)) in terms.iter().enumerate() {
                total += phi;
                let i = nodes[j];
                for k in 0..self.strides.len() {
                    let c = self.weight * w * self.diff(v, i, k, up) / self.h;
                    let other = if up { i + self.strides[k] } else { i - self.strides[k] };
                    let sign = if up { 1.0 } else { -1.0 };
                    grad[other] += sign * c;
                    grad[i] -= sign * c;
                }
            }
        }
        for (g, &f) in grad.iter_mut().zip(&self.free) {
            if !f {
                *g = 0.0;
            }
        }
        (self.weight * total, grad)
    }
}

/// The unsmoothed discrete energy minimized by [`minimize`].
pub fn discrete_objective(spec: &dyn NFunction, u: &ScalarField) -> f64 {
    Stencil::new(u.grid(), u.gd().mask()).energy(spec, u.grid(), u.values())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn boundary_hash(v: &[f64], free: &[bool], mask: &[bool]) -> String {
    // FNV-1a over the bits of the fixed values
    let mut h: u64 = 0xcbf29ce484222325;
    for ((x, &f), &m) in v.iter().zip(free).zip(mask) {
        if m && !f {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    format!("{h:016x}")
}

fn check_convexity(spec: &dyn NFunction, grid: &Grid, mask: &[bool]) -> Result<()> {
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    let step = (nodes.len() / 16).max(1);
    let xis: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    for &i in nodes.iter().step_by(step) {
        let x = grid.point(i);
        let v: Vec<f64> = xis.iter().map(|&t| spec.eval(&x, t)).collect();
        for w in v.windows(3) {
            if w[0] + w[2] - 2.0 * w[1] < -1e-12 * w[1].abs().max(1.0) {
                return Err(Error::Precondition(format!("psi is not convex in xi at x = {x:?}")));
            }
        }
    }
    Ok(())
}

/// Minimizes the discrete energy over the values at free nodes, keeping
/// every other mask node at `u0`. Free nodes are mask nodes whose `2d` axis
/// neighbours all lie in the mask. L-BFGS directions with Armijo
/// backtracking; each accepted step strictly decreases the smoothed energy.
pub fn minimize(spec: &dyn NFunction, u0: &ScalarField, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let grid = u0.grid().clone();
    let mask = u0.gd().mask();
    check_convexity(spec, &grid, mask)?;
    let st = Stencil::new(&grid, mask);
    let boundary_id = boundary_hash(u0.values(), &st.free, mask);
    let mut x = u0.values().to_vec();
    let (mut f, mut g) = st.energy_grad(spec, &grid, &x, opts.mu);
    if !f.is_finite() {
        return Err(Error::Precondition("non-finite objective at the initial field".into()));
    }
    let mut history = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut final_step_norm = 0.0;
    let mut stop = StopReason::MaxIterations;
    if !st.free.iter().any(|&b| b) {
        stop = StopReason::NoFreeNodes;
    }
    while stop == StopReason::MaxIterations && iterations < opts.max_iter {
        if inf_norm(&g) == 0.0 {
            stop = StopReason::StepTolerance;
            break;
        }
        let mut dir = two_loop(&g, &pairs);
        if dot(&g, &dir) >= 0.0 {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
        }
        let accepted = loop {
            match line_search(spec, &st, &grid, &x, f, &g, &dir, opts) {
                Some(found) => break Some(found),
                None if !pairs.is_empty() => {
                    pairs.clear();
                    dir = g.iter().map(|v| -v).collect();
                }
                None => break None,
            }
        };
        let Some((alpha, xn, fn_, gn)) = accepted else {
            stop = StopReason::Stalled;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        final_step_norm = alpha * inf_norm(&dir);
        x = xn;
        f = fn_;
        g = gn;
        history.push(f);
        iterations += 1;
        if final_step_norm <= opts.step_tol {
            stop = StopReason::StepTolerance;
        }
    }
    let minimizer = ScalarField::new(u0.gd().clone(), x)?;
    let objective = st.energy(spec, &grid, minimizer.values());
    Ok(MinimizeResult { minimizer, objective, history, iterations, final_step_norm, stop, boundary_id })
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn line_search(
    spec: &dyn NFunction,
    st: &Stencil,
    grid: &Grid,
    x: &[f64],
    f: f64,
    g: &[f64],
    dir: &[f64],
    opts: &MinimizeOptions,
) -> Option<(f64, Vec<f64>, f64, Vec<f64>)> {
    let slope = dot(g, dir);
    let mut alpha = opts.initial_step;
    for _ in 0..80 {
        let xn: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + alpha * d).collect();
        let (fn_, gn) = st.energy_grad(spec, grid, &xn, opts.mu);
        if fn_.is_finite() && fn_ < f && fn_ <= f + opts.armijo * alpha * slope {
            return Some((alpha, xn, fn_, gn));
        }
        alpha *= opts.shrink;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, Centering, FieldFixture, GridDomain};
    use crate::geometry::{Domain, Region};
    use crate::nfunctions::{CoefficientMap, DoublePhase, PowerLaw};
    use std::sync::Arc;

    fn vertex_square(n: usize) -> Arc<GridDomain> {
        let d = Domain::unit_square();
        GridDomain::new(Grid::covering(&d.bbox(), n, 0.0, 0.0, Centering::Vertex).unwrap(), d).unwrap()
    }

    #[test]
    fn zero_boundary_data_gives_zero() {
        let gd = vertex_square(16);
        let s = PowerLaw::new(2.0, 2).unwrap();
        let r = minimize(&s, &ScalarField::zeros(gd), &MinimizeOptions::default()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.minimizer.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_data_is_reproduced_for_x_independent_spec() {
        let gd = vertex_square(24);
        let s = DoublePhase::with_defaults(2.0, 3.0, 0.5, 2, CoefficientMap::Const(1.0), 1.0).unwrap();
        let u0 = sample(&FieldFixture::Linear(vec![0.6, 0.8]), &gd);
        assert!((discrete_objective(&s, &u0) - 2.0).abs() < 1e-12);
        let r = minimize(&s, &u0, &MinimizeOptions::default()).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn history_is_monotone_and_boundary_is_kept() {
        let gd = vertex_square(20);
        let s = DoublePhase::with_defaults(2.0, 2.4, 0.5, 2, CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 }, 1.0)
            .unwrap();
        let u0 = ScalarField::from_fn(gd.clone(), |x| x[0] * x[0] + (3.0 * x[1]).sin());
        let r = minimize(&s, &u0, &MinimizeOptions::default()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.objective < discrete_objective(&s, &u0));
        let st = Stencil::new(gd.grid(), gd.mask());
        for i in 0..gd.grid().len() {
            if gd.mask()[i] && !st.free[i] {
                assert_eq!(r.minimizer.values()[i], u0.values()[i]);
            }
        }
        let again = minimize(&s, &u0, &MinimizeOptions::default()).unwrap();
        assert_eq!(again.boundary_id, r.boundary_id);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let gd = vertex_square(6);
        let s = DoublePhase::with_defaults(1.5, 2.4, 0.5, 2, CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 }, 1.0)
            .unwrap();
        let u = ScalarField::from_fn(gd.clone(), |x| (2.0 * x[0]).sin() + x[1] * x[0]);
        let st = Stencil::new(gd.grid(), gd.mask());
        let (_, g) = st.energy_grad(&s, gd.grid(), u.values(), 1e-8);
        let i = gd.grid().ravel(&[3, 2]);
        let e = 1e-6;
        let mut up = u.values().to_vec();
        up[i] += e;
        let mut dn = u.values().to_vec();
        dn[i] -= e;
        let fd = (st.energy_grad(&s, gd.grid(), &up, 1e-8).0 - st.energy_grad(&s, gd.grid(), &dn, 1e-8).0) / (2.0 * e);
        assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0), "{fd} {}", g[i]);
    }
}
