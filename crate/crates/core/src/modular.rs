//! Modulars, Luxemburg and Musielak-Orlicz-Sobolev norms, and probes of the
//! modular/norm convergence relations.

use serde::{Deserialize, Serialize};

use crate::fields::{gradient, lp_norm, sup_norm, ScalarField};
use crate::nfunctions::NFunction;
use crate::{par, Error, Result};

/// Default relative tolerance of the Luxemburg bisection.
pub const LUX_TOL: f64 = 1e-8;

const MAX_BISECTIONS: usize = 400;

/// `sum_{nodes in Omega} psi(x, |f(x)|) h^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularResult {
    pub value: f64,
    pub h: f64,
    pub measure: f64,
}

fn scaled_modular(spec: &dyn NFunction, f: &ScalarField, scale: f64) -> f64 {
    let g = f.grid();
    let omega = f.gd().omega();
    let v = f.values();
    par::sum(g.len(), |i| {
        if omega[i] && v[i] != 0.0 {
            spec.eval(&g.point(i), scale * v[i].abs())
        } else {
            0.0
        }
    }) * g.cell_volume()
}

/// Node quadrature of `int_Omega psi(x, |f(x)|) dx`.
pub fn modular(spec: &dyn NFunction, f: &ScalarField) -> ModularResult {
    ModularResult {
        value: scaled_modular(spec, f, 1.0),
        h: f.grid().h(),
        measure: f.gd().omega_measure(),
    }
}

/// `inf {lambda > 0 : modular(f / lambda) <= 1}` by bisection in
/// `log lambda` down to relative bracket width `tol`; returns the upper end.
pub fn luxemburg_norm(spec: &dyn NFunction, f: &ScalarField, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let s = sup_norm(f);
    if s == 0.0 {
        return Ok(0.0);
    }
    let vol = f.gd().omega_measure();
    let m = |lambda: f64| scaled_modular(spec, f, 1.0 / lambda);
    // xi* = smallest xi with m_psi(xi) |Omega| >= 1
    let mut xi_star = 1.0;
    while spec.lower_envelope(xi_star) * vol < 1.0 && xi_star < 1e300 {
        xi_star *= 2.0;
    }
    while xi_star > 1e-300 && spec.lower_envelope(0.5 * xi_star) * vol >= 1.0 {
        xi_star *= 0.5;
    }
    let mut lo = s / xi_star;
    let mut hi = s * vol.max(1.0);
    if hi <= lo {
        hi = 2.0 * lo;
    }
    let mut guard = 0;
    while m(lo) <= 1.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::NoConvergence(format!("cannot bracket from below, lambda_lo = {lo}")));
        }
    }
    while m(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::NoConvergence(format!("cannot bracket from above, lambda_hi = {hi}")));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi / lo - 1.0 <= tol {
            return Ok(hi);
        }
        let mid = (lo * hi).sqrt();
        if m(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence(format!("bracket [{lo}, {hi}] after {MAX_BISECTIONS} bisections")))
}

/// `||u||_1 + ||grad u||_psi`.
pub fn sobolev_norm(spec: &dyn NFunction, u: &ScalarField, tol: f64) -> Result<f64> {
    Ok(lp_norm(u, 1.0)? + luxemburg_norm(spec, &gradient(u).magnitude(), tol)?)
}

/// Jensen and doubling scaling of the modular between `c f` and `dd f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Doubling steps `k = ceil(log2(dd / c))` when `dd > c`.
    pub k: Option<i32>,
    pub pass: bool,
}

/// For `dd < c`: `modular(dd f) <= (dd / c) modular(c f)`; for `dd > c`:
/// `modular(dd f) <= C4^k (dd / (2^k c)) modular(c f)` with
/// `k = ceil(log2(dd / c))`.
pub fn scaling_inequalities_check(spec: &dyn NFunction, f: &ScalarField, c: f64, dd: f64) -> Result<ScalingReport> {
    if !(c > 0.0 && dd > 0.0) {
        return Err(Error::Domain("scaling constants must be positive".into()));
    }
    let lhs = scaled_modular(spec, f, dd);
    let base = scaled_modular(spec, f, c);
    let (rhs, k) = if dd == c {
        (base, None)
    } else if dd < c {
        (dd / c * base, None)
    } else {
        let k = (dd / c).log2().ceil() as i32;
        (spec.growth().c4.powi(k) * dd / (2f64.powi(k) * c) * base, Some(k))
    };
    Ok(ScalingReport { lhs, rhs, k, pass: lhs <= rhs * (1.0 + 1e-12) })
}

/// Number of strict increases in a sequence.
pub fn count_inversions(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}

/// One term of a norm/modular equivalence probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub modular_dist: f64,
    pub lux_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub consistent: bool,
}

/// Tabulates `modular(f_n - f)` and `||f_n - f||_psi`; consistent when both
/// columns decrease with at most one inversion and both final values are
/// at most `tol`.
pub fn norm_modular_equivalence_probe(
    spec: &dyn NFunction,
    sequence: &[ScalarField],
    limit: &ScalarField,
    tol: f64,
    lux_tol: f64,
) -> Result<ProbeReport> {
    let mut rows = Vec::with_capacity(sequence.len());
    for f in sequence {
        let diff = f.sub(limit)?;
        rows.push(ProbeRow {
            modular_dist: modular(spec, &diff).value,
            lux_dist: luxemburg_norm(spec, &diff, lux_tol)?,
        });
    }
    let md: Vec<f64> = rows.iter().map(|r| r.modular_dist).collect();
    let ld: Vec<f64> = rows.iter().map(|r| r.lux_dist).collect();
    let consistent = count_inversions(&md) <= 1
        && count_inversions(&ld) <= 1
        && md.last().map_or(true, |&v| v <= tol)
        && ld.last().map_or(true, |&v| v <= tol);
    Ok(ProbeReport { rows, consistent })
}
