use serde::{Deserialize, Serialize};

use super::domain::Region;
use crate::{Error, Result};

/// Outcome of a sampled star-shapedness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub star_shaped: bool,
    pub rays_tested: usize,
    pub step: f64,
    /// Ray origin and direction of the first ray that left and re-entered.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// `n` deterministic unit directions in dimension `d`: both signs in 1-D,
/// equally spaced angles in 2-D, a Fibonacci lattice on the sphere in 3-D.
pub fn sphere_directions(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n.max(1))
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n.max(1) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let n = n.max(2);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
    }
}

/// Tests whether `u` is star-shaped with respect to `B_radius(center)`.
///
/// Rays start at the center and at points of radius `R/2` and nearly `R`
/// in each of `ray_count` directions, and run in every direction; along
/// each ray the indicator of `u` must switch from inside to outside exactly
/// once at resolution `step`.
pub fn is_star_shaped(
    u: &dyn Region,
    center: &[f64],
    radius: f64,
    ray_count: usize,
    step: f64,
) -> Result<StarReport> {
    if !(radius > 0.0 && step > 0.0) {
        return Err(Error::Domain("radius and step must be positive".into()));
    }
    let d = u.dim();
    let dirs = sphere_directions(d, ray_count);
    let mut origins = vec![center.to_vec()];
    for v in &dirs {
        for scale in [0.5, 1.0 - 1e-9] {
            origins.push((0..d).map(|k| center[k] + scale * radius * v[k]).collect());
        }
    }
    if let Some(bad) = origins.iter().find(|b| !u.contains(b)) {
        return Err(Error::Precondition(format!("ball point {bad:?} lies outside the set")));
    }
    let bb = u.bbox();
    let reach = bb.diameter() + radius;
    let steps = (reach / step).ceil() as usize;
    let mut rays = 0;
    for b in &origins {
        for v in &dirs {
            rays += 1;
            let mut inside = true;
            let mut exits = 0;
            let mut y = b.clone();
            for s in 1..=steps {
                let t = s as f64 * step;
                for k in 0..d {
                    y[k] = b[k] + t * v[k];
                }
                let now = u.contains(&y);
                if inside && !now {
                    exits += 1;
                }
                if !inside && now {
                    exits += 1;
                }
                inside = now;
            }
            if exits != 1 || inside {
                return Ok(StarReport {
                    star_shaped: false,
                    rays_tested: rays,
                    step,
                    witness: Some((b.clone(), v.clone())),
                });
            }
        }
    }
    Ok(StarReport { star_shaped: true, rays_tested: rays, step, witness: None })
}
