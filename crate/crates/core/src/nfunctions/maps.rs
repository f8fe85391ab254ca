use serde::{Deserialize, Serialize};

/// Coefficient `a: R^d -> [0, inf)` of a double-phase integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientMap {
    /// `a(x) = c`.
    Const(f64),
    /// `a(x) = scale * |x_axis|^alpha`.
    AbsPow { axis: usize, alpha: f64, scale: f64 },
    /// `a(x) = scale * |x - point|^alpha`.
    DistPow { point: Vec<f64>, alpha: f64, scale: f64 },
    /// Zhikov-type coefficient on the unit square:
    /// `a(x) = scale * max(0, |x_2 - 1/2| - |x_1 - 1/2|)`.
    /// Vanishes on both diagonals and in the left/right cones.
    Checkerboard { scale: f64 },
}

impl CoefficientMap {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            CoefficientMap::Const(c) => *c,
            CoefficientMap::AbsPow { axis, alpha, scale } => {
                scale * x.get(*axis).copied().unwrap_or(0.0).abs().powf(*alpha)
            }
            CoefficientMap::DistPow { point, alpha, scale } => {
                let r2: f64 = x.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
                scale * r2.sqrt().powf(*alpha)
            }
            CoefficientMap::Checkerboard { scale } => {
                let t1 = (x[0] - 0.5).abs();
                let t2 = x.get(1).map_or(0.0, |v| (v - 0.5).abs());
                scale * (t2 - t1).max(0.0)
            }
        }
    }

    /// A Hölder seminorm `|a|_alpha` valid on all of `R^d`, when one is known
    /// in closed form for the requested exponent.
    pub fn nominal_seminorm(&self, alpha: f64) -> Option<f64> {
        match self {
            CoefficientMap::Const(_) => Some(0.0),
            CoefficientMap::AbsPow { alpha: b, scale, .. }
            | CoefficientMap::DistPow { alpha: b, scale, .. } => {
                ((b - alpha).abs() < 1e-15).then_some(scale.abs())
            }
            CoefficientMap::Checkerboard { scale } => {
                ((alpha - 1.0).abs() < 1e-15).then_some(scale.abs() * std::f64::consts::SQRT_2)
            }
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            CoefficientMap::Const(c) => *c >= 0.0,
            CoefficientMap::AbsPow { scale, .. }
            | CoefficientMap::DistPow { scale, .. }
            | CoefficientMap::Checkerboard { scale } => *scale >= 0.0,
        }
    }
}

/// Variable exponent `x -> p(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExponentMap {
    Const(f64),
    /// `base + amplitude * sin(frequency * x_axis)`.
    SinPerturb { axis: usize, amplitude: f64, frequency: f64, base: f64 },
}

impl ExponentMap {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ExponentMap::Const(c) => *c,
            ExponentMap::SinPerturb { axis, amplitude, frequency, base } => {
                base + amplitude * (frequency * x.get(*axis).copied().unwrap_or(0.0)).sin()
            }
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            ExponentMap::Const(c) => *c,
            ExponentMap::SinPerturb { amplitude, base, .. } => base - amplitude.abs(),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            ExponentMap::Const(c) => *c,
            ExponentMap::SinPerturb { amplitude, base, .. } => base + amplitude.abs(),
        }
    }

    /// A log-Hölder constant `C` with `|p(x) - p(y)| <= -C / log|x - y|`
    /// for `|x - y| <= 1/2`. A Lipschitz map with constant `L` satisfies this
    /// with `C = L / e`, the maximum of `L t (-log t)`.
    pub fn nominal_log_holder(&self) -> f64 {
        match self {
            ExponentMap::Const(_) => 0.0,
            ExponentMap::SinPerturb { amplitude, frequency, .. } => {
                (amplitude * frequency).abs() / std::f64::consts::E
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_vanishes_on_diagonals() {
        let a = CoefficientMap::Checkerboard { scale: 2.0 };
        for t in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            assert_eq!(a.eval(&[t, t]), 0.0);
            assert_eq!(a.eval(&[t, 1.0 - t]), 0.0);
        }
        assert!(a.eval(&[0.5, 0.9]) > 0.0);
        assert_eq!(a.eval(&[0.9, 0.5]), 0.0);
    }

    #[test]
    fn abs_pow_seminorm() {
        let a = CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 };
        assert_eq!(a.nominal_seminorm(0.5), Some(1.0));
        assert_eq!(a.nominal_seminorm(0.7), None);
        assert_eq!(a.eval(&[0.25, 3.0]), 0.5);
    }

    #[test]
    fn sin_exponent_log_holder() {
        let p = ExponentMap::SinPerturb { axis: 0, amplitude: 0.1, frequency: 1.0, base: 2.0 };
        let c = p.nominal_log_holder();
        let mut t: f64 = 1e-6;
        while t <= 0.5 {
            let lhs = (p.eval(&[0.3 + t]) - p.eval(&[0.3])).abs();
            assert!(lhs <= -c / t.ln() + 1e-15, "t = {t}");
            t *= 1.1;
        }
    }
}
