use serde::{Deserialize, Serialize};

use super::domain::{dist, Domain};
use crate::{Error, Result};

/// Shrink factor `kappa = 1 - 4 eps / R` for `0 <= eps <= R/8`.
pub fn shrink_factor(epsilon: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    if !(epsilon >= 0.0 && epsilon <= r / 8.0) {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} violates 0 <= epsilon <= R/8 = {}",
            r / 8.0
        )));
    }
    Ok(1.0 - 4.0 * epsilon / r)
}

/// `x_i + (x - x_i - y) / kappa`.
pub fn squeeze_point(x: &[f64], x_i: &[f64], kappa: f64, y: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|k| x_i[k] + (x[k] - x_i[k] - y[k]) / kappa).collect()
}

/// `x / (1 - 2 eps) - y`, the unit-ball squeeze.
pub fn ball_squeeze_point(x: &[f64], epsilon: f64, y: &[f64]) -> Vec<f64> {
    let s = 1.0 - 2.0 * epsilon;
    (0..x.len()).map(|k| x[k] / s - y[k]).collect()
}

/// `C = 8 diam(Omega) / R + 2`.
pub fn squeeze_locality_constant(domain: &Domain, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    Ok(8.0 * domain.diameter() / r + 2.0)
}

/// Measured clearance between the shrunk boundary and the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub kappa: f64,
    pub distance: f64,
    pub required: f64,
    pub pitch: f64,
    pub pass: bool,
}

/// Minimum distance between the sampled boundary of `x0 + kappa (U - x0)`
/// and the sampled boundary of `U`; passes when it is at least
/// `2 eps - 2 pitch`.
pub fn verify_shrink_distance(
    u: &Domain,
    x0: &[f64],
    r: f64,
    epsilon: f64,
    pitch: f64,
) -> Result<ShrinkReport> {
    let kappa = shrink_factor(epsilon, r)?;
    let boundary = u.boundary_samples(pitch);
    let shrunk: Vec<Vec<f64>> = boundary
        .iter()
        .map(|b| b.iter().zip(x0).map(|(bk, ck)| ck + kappa * (bk - ck)).collect())
        .collect();
    let distance = crate::par::map(shrunk.len(), |i| {
        boundary.iter().map(|b| dist(&shrunk[i], b)).fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let required = 2.0 * epsilon;
    Ok(ShrinkReport { kappa, distance, required, pitch, pass: distance >= required - 2.0 * pitch })
}
