//! Mollification with squeezing on the unit ball, on star-shaped pieces,
//! and as the partition-of-unity composite, with the gradient sup-norm
//! bounds used to control `psi(x, |grad S^eps u|)`.

use serde::{Deserialize, Serialize};

use crate::fields::{gradient, lp_norm, sup_norm, GridDomain, Mollifier, ScalarField};
use crate::geometry::{shrink_factor, squeeze_locality_constant, Domain, PartitionOfUnity, Region, StarCover};
use crate::{par, Error, Result};

/// Which squeeze map the plan applies.
#[derive(Debug, Clone, PartialEq)]
pub enum SqueezeMode {
    /// `u(x / (1 - 2 eps) - y)` on the unit ball.
    Ball,
    /// `u(x0 + (x - x0 - y) / kappa)` with `kappa = 1 - 4 eps / R`.
    Star { center: Vec<f64>, r: f64 },
    /// `sum_i S^eps_{U_i}(u theta_i)`.
    Composite { cover: StarCover, pou: PartitionOfUnity },
}

/// A validated operator: radius, kernel, and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeMollifyPlan {
    pub epsilon: f64,
    pub kernel: Mollifier,
    pub mode: SqueezeMode,
}

impl SqueezeMollifyPlan {
    pub fn ball(epsilon: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(Error::Domain(format!("ball mode needs eps in (0, 1/4), got {epsilon}")));
        }
        Ok(Self { epsilon, kernel: Mollifier::new(epsilon, dim)?, mode: SqueezeMode::Ball })
    }

    pub fn star(epsilon: f64, center: Vec<f64>, r: f64) -> Result<Self> {
        star_range(epsilon, r)?;
        let dim = center.len();
        Ok(Self { epsilon, kernel: Mollifier::new(epsilon, dim)?, mode: SqueezeMode::Star { center, r } })
    }

    pub fn composite(epsilon: f64, cover: StarCover, pou: PartitionOfUnity) -> Result<Self> {
        star_range(epsilon, cover.r)?;
        if pou.weights.len() != cover.len() {
            return Err(Error::Precondition("one partition weight per cover piece is required".into()));
        }
        let dim = cover.domain.dim();
        Ok(Self { epsilon, kernel: Mollifier::new(epsilon, dim)?, mode: SqueezeMode::Composite { cover, pou } })
    }

    /// Plan for an existing mode at a new radius.
    pub fn with_mode(epsilon: f64, dim: usize, mode: SqueezeMode) -> Result<Self> {
        match mode {
            SqueezeMode::Ball => Self::ball(epsilon, dim),
            SqueezeMode::Star { center, r } => Self::star(epsilon, center, r),
            SqueezeMode::Composite { cover, pou } => Self::composite(epsilon, cover, pou),
        }
    }

    /// Squeeze factor: `1 - 2 eps` (ball) or `1 - 4 eps / R`.
    pub fn kappa(&self) -> f64 {
        match &self.mode {
            SqueezeMode::Ball => 1.0 - 2.0 * self.epsilon,
            SqueezeMode::Star { r, .. } => 1.0 - 4.0 * self.epsilon / r,
            SqueezeMode::Composite { cover, .. } => 1.0 - 4.0 * self.epsilon / cover.r,
        }
    }

    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        match &self.mode {
            SqueezeMode::Ball => squeeze_mollify_ball(u, self.epsilon),
            SqueezeMode::Star { center, r } => squeeze_mollify_star(u, center, *r, self.epsilon),
            SqueezeMode::Composite { cover, pou } => squeeze_mollify_general(u, cover, pou, self.epsilon),
        }
    }
}

fn star_range(epsilon: f64, r: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {epsilon}")));
    }
    shrink_factor(epsilon, r).map(|_| ())
}

/// Kernel nodes `y_k` on a sub-lattice of pitch `min(h, eps/8)` with
/// weights normalized to sum to one.
fn kernel_nodes(eta: &Mollifier, h: f64) -> (Vec<[f64; 3]>, Vec<f64>) {
    let pitch = h.min(eta.epsilon() / 8.0);
    let (offsets, weights) = crate::fields::kernel_quadrature(eta, pitch);
    let ys = offsets.iter().map(|o| o.map(|j| j as f64 * pitch)).collect();
    (ys, weights)
}

/// `out(x) = sum_k w_k u_hat(c + (x - c) / kappa - y_scale y_k)`, where
/// `u_hat` is the interpolant of `u` masked to `support`.
fn squeeze_core(
    u: &ScalarField,
    support: &Domain,
    center: &[f64],
    kappa: f64,
    y_scale: f64,
    eta: &Mollifier,
) -> Result<ScalarField> {
    let g = u.grid();
    let h = g.h();
    let d = g.dim();
    if eta.epsilon() < 0.25 * h {
        return Err(Error::Resolution(format!("eps = {} is below h/4 = {}", eta.epsilon(), 0.25 * h)));
    }
    if eta.dim() != d || center.len() != d {
        return Err(Error::Domain("operator and grid dimensions differ".into()));
    }
    let values = u.values();
    let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
    for (i, &v) in values.iter().enumerate() {
        if v != 0.0 {
            let x = g.point(i);
            for k in 0..d {
                lo[k] = lo[k].min(x[k] - h);
                hi[k] = hi[k].max(x[k] + h);
            }
        }
    }
    let gd = u.gd().clone();
    if lo[0] > hi[0] {
        return Ok(ScalarField::zeros(gd));
    }
    let reach = eta.epsilon() * y_scale * kappa + h;
    for k in 0..d {
        lo[k] = center[k] + kappa * (lo[k] - center[k]) - reach;
        hi[k] = center[k] + kappa * (hi[k] - center[k]) + reach;
    }
    let mut out = vec![0.0; g.len()];
    let Some(window) = g.index_window(&lo, &hi) else {
        return Ok(ScalarField::zeros(gd));
    };
    let (ys, ws) = kernel_nodes(eta, h);
    let counts: Vec<usize> = window.iter().map(|(a, b)| b - a + 1).collect();
    let total: usize = counts.iter().product();
    let computed: Vec<(usize, f64)> = par::map(total, |t| {
        let mut rest = t;
        let mut multi = [0usize; 3];
        for k in 0..d {
            multi[k] = window[k].0 + rest % counts[k];
            rest /= counts[k];
        }
        let idx = g.ravel(&multi[..d]);
        let mut base = [0.0; 3];
        for k in 0..d {
            let x = g.coord(k, multi[k]);
            base[k] = center[k] + (x - center[k]) / kappa;
        }
        let mut z = [0.0; 3];
        let mut s = 0.0;
        for (y, w) in ys.iter().zip(&ws) {
            for k in 0..d {
                z[k] = base[k] - y_scale * y[k];
            }
            if support.contains(&z[..d]) {
                s += w * crate::fields::interpolate_values(g, values, &z[..d]);
            }
        }
        (idx, s)
    });
    for (idx, s) in computed {
        if s != 0.0 && !gd.mask()[idx] {
            return Err(Error::Precondition(format!(
                "squeezed field is nonzero at {:?}, outside the domain",
                g.point(idx)
            )));
        }
        out[idx] = s;
    }
    ScalarField::new(gd, out)
}

/// `u^eps(x) = int eta_eps(y) u(x / (1 - 2 eps) - y) dy` for `u` supported in
/// the closed unit ball centered at the origin.
pub fn squeeze_mollify_ball(u: &ScalarField, epsilon: f64) -> Result<ScalarField> {
    let plan = SqueezeMollifyPlan::ball(epsilon, u.grid().dim())?;
    let d = u.grid().dim();
    let ball = Domain::unit_ball(d);
    squeeze_core(u, &ball, &vec![0.0; d], plan.kappa(), 1.0, &plan.kernel)
}

/// `S^eps_U u(x) = int u(x0 + (x - x0 - y) / kappa) eta_eps(y) dy` with
/// `kappa = 1 - 4 eps / R`.
pub fn squeeze_mollify_star(u: &ScalarField, x0: &[f64], r: f64, epsilon: f64) -> Result<ScalarField> {
    star_range(epsilon, r)?;
    let kappa = shrink_factor(epsilon, r)?;
    let eta = Mollifier::new(epsilon, u.grid().dim())?;
    squeeze_core(u, u.gd().domain(), x0, kappa, 1.0 / kappa, &eta)
}

/// `S^eps u = sum_i S^eps_{U_i}(u theta_i)` on the common grid.
pub fn squeeze_mollify_general(
    u: &ScalarField,
    cover: &StarCover,
    pou: &PartitionOfUnity,
    epsilon: f64,
) -> Result<ScalarField> {
    star_range(epsilon, cover.r)?;
    let mut acc = ScalarField::zeros(u.gd().clone());
    for (piece, theta) in cover.pieces.iter().zip(&pou.weights) {
        let part = u.mul(theta)?;
        let s = squeeze_mollify_star(&part, &piece.center, cover.r, epsilon)?;
        acc = acc.add(&s)?;
    }
    Ok(acc)
}

/// A gradient sup-norm bound next to the measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradBound {
    pub bound: f64,
    pub measured: f64,
    /// The `D` (or calligraphic `D`) constant of the bound.
    pub constant: f64,
}

impl GradBound {
    /// `measured <= bound (1 + slack)`.
    pub fn holds(&self, slack: f64) -> bool {
        self.measured <= self.bound * (1.0 + slack)
    }
}

/// Which integrability regime bounds the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundCase {
    /// `p <= d`: through `||u||_inf ||grad eta_eps||_1`.
    Bounded,
    /// `p > d`: through `||grad u||_p ||eta_eps||_{p'}`.
    Integrable,
}

fn measured_grad(field: &ScalarField) -> f64 {
    sup_norm(&gradient(field).magnitude())
}

/// Ball mode, `p <= d`: `D (5 eps)^-1` with `D = 5 ||u||_inf ||grad eta||_1`.
pub fn grad_bound_case1(u: &ScalarField, epsilon: f64) -> Result<GradBound> {
    let out = squeeze_mollify_ball(u, epsilon)?;
    let eta = Mollifier::new(epsilon, u.grid().dim())?;
    let constant = 5.0 * sup_norm(u) * eta.unit_grad_l1();
    Ok(GradBound { bound: constant / (5.0 * epsilon), measured: measured_grad(&out), constant })
}

/// Ball mode, `p > d`: `D (5 eps)^(-d/p)` with
/// `D = 5^(d/p) ||grad u||_p ||eta||_{p'}`.
pub fn grad_bound_case2(u: &ScalarField, epsilon: f64, p: f64) -> Result<GradBound> {
    let d = u.grid().dim() as f64;
    if !(p > d) {
        return Err(Error::Domain(format!("the integrable case needs p > d, got p = {p}, d = {d}")));
    }
    let out = squeeze_mollify_ball(u, epsilon)?;
    let eta = Mollifier::new(epsilon, u.grid().dim())?;
    let grad_p = lp_norm(&gradient(u).magnitude(), p)?;
    let constant = 5f64.powf(d / p) * grad_p * eta.unit_lp_norm(p / (p - 1.0));
    Ok(GradBound { bound: constant * (5.0 * epsilon).powf(-d / p), measured: measured_grad(&out), constant })
}

/// Composite mode: `D (C eps)^-1` with `D = n ||u||_inf ||grad eta||_1 C`,
/// or `D (C eps)^(-d/p)` with
/// `D = 2 C^(d/p) ||eta||_{p'} sum_i (||grad u||_p ||theta_i||_inf + ||u||_p ||grad theta_i||_inf)`,
/// where `C = 8 diam(Omega) / R + 2`.
pub fn grad_bound_general(
    u: &ScalarField,
    cover: &StarCover,
    pou: &PartitionOfUnity,
    epsilon: f64,
    case: BoundCase,
    p: f64,
) -> Result<GradBound> {
    let dim = u.grid().dim();
    let d = dim as f64;
    let c = squeeze_locality_constant(&cover.domain, cover.r)?;
    let eta = Mollifier::new(epsilon, dim)?;
    let out = squeeze_mollify_general(u, cover, pou, epsilon)?;
    let measured = measured_grad(&out);
    let (constant, bound) = match case {
        BoundCase::Bounded => {
            let k = cover.len() as f64 * sup_norm(u) * eta.unit_grad_l1() * c;
            (k, k / (c * epsilon))
        }
        BoundCase::Integrable => {
            if !(p > d) {
                return Err(Error::Domain(format!("the integrable case needs p > d, got p = {p}, d = {d}")));
            }
            let mask = u.gd().mask();
            let grad_p = lp_norm(&gradient(u).magnitude(), p)?;
            let u_p = lp_norm(u, p)?;
            let mut sum = 0.0;
            for theta in &pou.weights {
                let on_omega = |v: &[f64]| {
                    v.iter().zip(mask).filter(|(_, &m)| m).map(|(x, _)| x.abs()).fold(0.0, f64::max)
                };
                let th_sup = on_omega(theta.values());
                let dth_sup = on_omega(gradient(theta).magnitude().values());
                sum += grad_p * th_sup + u_p * dth_sup;
            }
            let k = 2.0 * c.powf(d / p) * eta.unit_lp_norm(p / (p - 1.0)) * sum;
            (k, k * (c * epsilon).powf(-d / p))
        }
    };
    Ok(GradBound { bound, measured, constant })
}

/// Grid domain helper: the unit ball on `grid`.
pub fn unit_ball_domain(grid: crate::fields::Grid) -> Result<std::sync::Arc<GridDomain>> {
    let d = grid.dim();
    GridDomain::new(grid, Domain::unit_ball(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, Centering, FieldFixture, Grid};
    use crate::geometry::{build_cover, build_partition};

    fn ball_gd(n: usize) -> std::sync::Arc<GridDomain> {
        let b = Domain::unit_ball(2);
        unit_ball_domain(Grid::covering(&b.bbox(), n, 0.0, 0.1, Centering::Cell).unwrap()).unwrap()
    }

    #[test]
    fn ball_mode_preserves_constants_at_center_and_clears_the_rim() {
        let gd = ball_gd(128);
        let u = sample(&FieldFixture::Const(1.0), &gd);
        let eps = 0.1;
        let out = squeeze_mollify_ball(&u, eps).unwrap();
        let g = gd.grid();
        for i in 0..g.len() {
            let x = g.point(i);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r >= 1.0 - eps {
                assert_eq!(out.values()[i], 0.0);
            }
            if r < 0.3 {
                assert!((out.values()[i] - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn plan_ranges() {
        assert!(SqueezeMollifyPlan::ball(0.25, 2).is_err());
        assert!(SqueezeMollifyPlan::star(0.07, vec![0.5, 0.5], 0.5).is_err());
        let p = SqueezeMollifyPlan::star(0.05, vec![0.5, 0.5], 0.5).unwrap();
        assert!((p.kappa() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn star_mode_support_stays_inside() {
        let sq = Domain::unit_square();
        let g = Grid::covering(&sq.bbox(), 64, 0.0, 0.1, Centering::Cell).unwrap();
        let gd = GridDomain::new(g.clone(), sq).unwrap();
        let u = sample(&FieldFixture::Const(1.0), &gd);
        let r = 0.5;
        let eps = r / 8.0;
        let out = squeeze_mollify_star(&u, &[0.5, 0.5], r, eps).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            if out.values()[i] != 0.0 {
                let clearance = x.iter().map(|c| c.min(1.0 - c)).fold(f64::INFINITY, f64::min);
                assert!(clearance >= eps, "{x:?}");
            }
            if (x[0] - 0.5).abs() < 0.05 && (x[1] - 0.5).abs() < 0.05 {
                assert!((out.values()[i] - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn single_piece_composite_matches_star() {
        let sq = Domain::unit_square();
        let g = Grid::covering(&sq.bbox(), 64, 0.0, 0.2, Centering::Cell).unwrap();
        let gd = GridDomain::new(g.clone(), sq.clone()).unwrap();
        let u = sample(&FieldFixture::Bump { center: vec![0.5, 0.5], radius: 0.4, height: 1.0 }, &gd);
        let cover = build_cover(&sq).unwrap();
        let pou = build_partition(&cover, &g, 4.0 * g.h()).unwrap();
        let a = squeeze_mollify_general(&u, &cover, &pou, 0.05).unwrap();
        let b = squeeze_mollify_star(&u, &[0.5, 0.5], 0.5, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bound_scalings_are_exact() {
        let gd = ball_gd(64);
        let u = sample(&FieldFixture::Bump { center: vec![0.0, 0.0], radius: 0.8, height: 1.0 }, &gd);
        let b1 = grad_bound_case1(&u, 0.1).unwrap();
        let b2 = grad_bound_case1(&u, 0.2).unwrap();
        assert!((b1.bound / b2.bound - 2.0).abs() < 1e-12);
        let c1 = grad_bound_case2(&u, 0.1, 3.0).unwrap();
        let c2 = grad_bound_case2(&u, 0.2, 3.0).unwrap();
        assert!((c1.bound / c2.bound - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(b1.holds(0.05) && c1.holds(0.05));
        assert!(grad_bound_case2(&u, 0.1, 2.0).is_err());
        let z = ScalarField::zeros(gd);
        let zb = grad_bound_case1(&z, 0.1).unwrap();
        assert_eq!((zb.bound, zb.measured), (0.0, 0.0));
    }
}
