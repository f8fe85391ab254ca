use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A value of `(-inf, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtValue {
    Finite(f64),
    PlusInfinity,
}

impl ExtValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtValue::Finite(v) => Some(v),
            ExtValue::PlusInfinity => None,
        }
    }
}

/// A real function of one variable sampled on strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampled1D {
    xs: Vec<f64>,
    values: Vec<ExtValue>,
}

impl Sampled1D {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_ext(xs, values.into_iter().map(ExtValue::Finite).collect())
    }

    pub fn with_ext(xs: Vec<f64>, values: Vec<ExtValue>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::Domain("abscissae and values differ in length".into()));
        }
        if xs.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("abscissae must be strictly increasing".into()));
        }
        if values.iter().any(|v| matches!(v, ExtValue::Finite(f) if !f.is_finite())) {
            return Err(Error::Domain("finite values must be finite floats".into()));
        }
        Ok(Self { xs, values })
    }

    /// Samples `f` on `xs`.
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[ExtValue] {
        &self.values
    }

    /// Values as floats; `+inf` maps to `f64::INFINITY` for display only.
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.finite().unwrap_or(f64::INFINITY)).collect()
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.finite().is_some())
    }

    fn finite_points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .zip(&self.values)
            .filter_map(|(&x, v)| v.finite().map(|f| (x, f)))
            .collect()
    }
}

/// Discrete Legendre-Fenchel transform `f*(eta) = max_i (xi_i eta - f(xi_i))`.
///
/// Points where `f = +inf` do not contribute to the supremum.
pub fn legendre(f: &Sampled1D, eta_grid: &[f64]) -> Result<Sampled1D> {
    let pts = f.finite_points();
    if pts.is_empty() {
        return Err(Error::Domain("conjugate of the constant +inf is -inf".into()));
    }
    let values = eta_grid
        .iter()
        .map(|&eta| pts.iter().map(|&(x, v)| x * eta - v).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Sampled1D::new(eta_grid.to_vec(), values)
}

/// Lower convex hull of points sorted by abscissa (Andrew's monotone chain).
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

const SNAP: f64 = 16.0 * f64::EPSILON;

/// Greatest convex minorant of the sampled points, returned on the same grid.
///
/// Outside the hull of the finite points the result is `+inf`. Values
/// within a few ulps above the hull are returned unchanged, so `f** <= f`
/// holds exactly, `f** = f` for convex samples, and the map is idempotent.
pub fn biconjugate(f: &Sampled1D) -> Sampled1D {
    let pts = f.finite_points();
    if pts.is_empty() {
        return f.clone();
    }
    let hull = lower_hull(&pts);
    let (lo, hi) = (hull[0].0, hull[hull.len() - 1].0);
    let mut seg = 0;
    let values = f
        .xs
        .iter()
        .zip(&f.values)
        .map(|(&x, &orig)| {
            if x < lo || x > hi {
                return ExtValue::PlusInfinity;
            }
            while seg + 1 < hull.len() - 1 && hull[seg + 1].0 < x {
                seg += 1;
            }
            let (v, scale) = if hull.len() == 1 {
                (hull[0].1, hull[0].1.abs())
            } else {
                let (a, b) = (hull[seg], hull[seg + 1]);
                let scale = a.1.abs().max(b.1.abs());
                if x == a.0 {
                    (a.1, scale)
                } else if x == b.0 {
                    (b.1, scale)
                } else {
                    let t = (x - a.0) / (b.0 - a.0);
                    (a.1 + t * (b.1 - a.1), scale)
                }
            };
            match orig {
                // points on the hull up to round-off keep their value
                ExtValue::Finite(o) if o - v <= SNAP * scale.max(o.abs()).max(1.0) => ExtValue::Finite(o),
                ExtValue::Finite(o) => ExtValue::Finite(v.min(o)),
                ExtValue::PlusInfinity => ExtValue::Finite(v),
            }
        })
        .collect();
    Sampled1D { xs: f.xs.clone(), values }
}

/// Double Legendre transform through the dual grid `eta_grid`; a cross-check
/// for [`biconjugate`] that loses accuracy where the slopes of `f` leave
/// the dual grid.
pub fn biconjugate_via_legendre(f: &Sampled1D, eta_grid: &[f64]) -> Result<Sampled1D> {
    let fstar = legendre(f, eta_grid)?;
    legendre(&fstar, &f.xs)
}
