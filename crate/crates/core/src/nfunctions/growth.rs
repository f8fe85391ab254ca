use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Growth and doubling constants of an N-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthData {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub xi0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
    pub dim: usize,
}

impl GrowthData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: f64,
        q: f64,
        alpha: f64,
        xi0: f64,
        c1: f64,
        c2: f64,
        c4: f64,
        dim: usize,
    ) -> Result<Self> {
        let mut bad = Vec::new();
        if !(p > 1.0 && p.is_finite()) {
            bad.push("p must exceed 1".to_string());
        }
        if !(q > p && q.is_finite()) {
            bad.push("q must exceed p".to_string());
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            bad.push("alpha in (0,1]".to_string());
        }
        if !(xi0 >= 1.0 && xi0.is_finite()) {
            bad.push("xi0 must be at least 1".to_string());
        }
        for (name, c) in [("C1", c1), ("C2", c2), ("C4", c4)] {
            if !(c > 0.0 && c.is_finite()) {
                bad.push(format!("{name} must be positive"));
            }
        }
        if dim == 0 {
            bad.push("dimension must be positive".to_string());
        }
        if !bad.is_empty() {
            return Err(Error::Domain(bad.join("; ")));
        }
        Ok(Self { p, q, alpha, xi0, c1, c2, c4, dim })
    }

    /// Defaults for `xi^p + a(x) xi^q`: `xi0 = 1`, `C1 = 1`, `C2 = 1 + sup a`, `C4 = 2^q`.
    pub fn double_phase(p: f64, q: f64, alpha: f64, dim: usize, sup_a: f64) -> Result<Self> {
        Self::new(p, q, alpha, 1.0, 1.0, 1.0 + sup_a.max(0.0), 2f64.powf(q), dim)
    }

    /// Whether `q <= p + alpha max(1, p/d)`.
    pub fn in_range(&self) -> bool {
        range_holds(self.p, self.q, self.alpha, self.dim as f64)
    }
}

fn range_holds(p: f64, q: f64, alpha: f64, d: f64) -> bool {
    q <= p + alpha * (p / d).max(1.0)
}

/// The exponent range `q <= p + alpha max(1, p/d)` under which the
/// approximation theorem applies.
pub fn exponent_range_ok(p: f64, q: f64, alpha: f64, d: usize) -> Result<bool> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p = {p} must exceed 1")));
    }
    if !(q >= p) || !q.is_finite() {
        return Err(Error::Domain(format!("q = {q} must be at least p = {p}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0,1]")));
    }
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(range_holds(p, q, alpha, d as f64))
}
