use super::conjugate::Sampled1D;
use super::families::{NFunction, NFunctionSpec};
use crate::geometry::{ball_lattice, Domain, Region};
use crate::{par, Error, Result};

/// `psi_{x,gamma}(xi) = min_y psi(y, xi)` over lattice points `y` of the
/// closed ball `B_gamma(x)` inside `closure(Omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub function: Sampled1D,
    pub points: Vec<Vec<f64>>,
    pub per_axis: usize,
    /// Lattice pitch of the ball sampling.
    pub pitch: f64,
    /// `|a|_alpha pitch^alpha` times the largest `xi^q`, when the coefficient
    /// has a known seminorm; bounds the sampling error of the minimum.
    pub sampling_bound: Option<f64>,
}

/// Lattice points of `B_gamma(x) ∩ closure(Omega)` with `per_axis` nodes per axis.
pub(crate) fn ball_points(domain: &Domain, x: &[f64], gamma: f64, per_axis: usize) -> Vec<Vec<f64>> {
    ball_lattice(x, gamma, per_axis).into_iter().filter(|y| domain.contains(y)).collect()
}

pub fn infimal_envelope(
    spec: &NFunctionSpec,
    x: &[f64],
    gamma: f64,
    domain: &Domain,
    xi_grid: &[f64],
    per_axis: usize,
) -> Result<Envelope> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if xi_grid.iter().any(|&v| v < 0.0) || xi_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("xi grid must be nonnegative and strictly increasing".into()));
    }
    let points = ball_points(domain, x, gamma, per_axis);
    if points.is_empty() {
        return Err(Error::Domain(format!("closed ball B_{gamma}({x:?}) misses the domain")));
    }
    let values = par::map(xi_grid.len(), |k| {
        points.iter().map(|y| spec.eval(y, xi_grid[k])).fold(f64::INFINITY, f64::min)
    });
    let pitch = 2.0 * gamma / (per_axis.max(2) - 1) as f64;
    let sampling_bound = match spec {
        NFunctionSpec::DoublePhase(dp) => {
            let xmax = xi_grid.last().copied().unwrap_or(0.0);
            Some(dp.holder() * pitch.powf(dp.growth().alpha) * xmax.powf(dp.growth().q))
        }
        _ => None,
    };
    Ok(Envelope { function: Sampled1D::new(xi_grid.to_vec(), values)?, points, per_axis, pitch, sampling_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunctions::{CoefficientMap, DoublePhase};

    fn dp(a: CoefficientMap) -> NFunctionSpec {
        NFunctionSpec::DoublePhase(DoublePhase::with_defaults(2.0, 2.4, 0.5, 2, a, 1.0).unwrap())
    }

    fn xis() -> Vec<f64> {
        (0..50).map(|k| k as f64 * 0.2).collect()
    }

    #[test]
    fn double_phase_envelope_uses_min_coefficient() {
        let a = CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 };
        let spec = dp(a.clone());
        let sq = Domain::unit_square();
        let env = infimal_envelope(&spec, &[0.5, 0.5], 0.1, &sq, &xis(), 17).unwrap();
        let amin = env.points.iter().map(|y| a.eval(y)).fold(f64::INFINITY, f64::min);
        for (xi, v) in env.function.xs().iter().zip(env.function.to_f64()) {
            let expected = xi.powi(2) + amin * xi.powf(2.4);
            assert!((v - expected).abs() <= 1e-12 * expected.max(1.0));
        }
        for y in &env.points {
            for (xi, v) in env.function.xs().iter().zip(env.function.to_f64()) {
                assert!(v <= spec.eval(y, *xi));
            }
        }
    }

    #[test]
    fn constant_coefficient_is_gamma_independent() {
        let spec = dp(CoefficientMap::Const(0.7));
        let sq = Domain::unit_square();
        let e1 = infimal_envelope(&spec, &[0.3, 0.3], 0.05, &sq, &xis(), 9).unwrap();
        let e2 = infimal_envelope(&spec, &[0.3, 0.3], 0.2, &sq, &xis(), 9).unwrap();
        assert_eq!(e1.function, e2.function);
    }

    #[test]
    fn small_gamma_recovers_psi() {
        let spec = dp(CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 });
        let sq = Domain::unit_square();
        let x = [0.4, 0.6];
        let e = infimal_envelope(&spec, &x, 1e-6, &sq, &xis(), 9).unwrap();
        for (xi, v) in e.function.xs().iter().zip(e.function.to_f64()) {
            let exact = spec.eval(&x, *xi);
            assert!((v - exact).abs() <= 1e-3 * exact.max(1.0));
        }
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let spec = dp(CoefficientMap::Const(1.0));
        let sq = Domain::unit_square();
        assert!(infimal_envelope(&spec, &[3.0, 3.0], 0.1, &sq, &xis(), 9).is_err());
    }
}
