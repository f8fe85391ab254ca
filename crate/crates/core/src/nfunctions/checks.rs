use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::conjugate::biconjugate;
use super::envelope::ball_points;
use super::families::{DoublePhase, NFunction, NFunctionSpec, VarExpDoublePhase};
use crate::geometry::{ball_lattice, Domain, Region};
use crate::{par, Error, Result};

/// Relative slack for comparing two evaluations of the same inequality.
pub const REL_TOL: f64 = 1e-12;

/// Worst sampled instance of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub xi: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Outcome of one sampled assumption check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub assumption: String,
    pub pass: bool,
    /// Worst sample (a violating one when `pass` is false).
    pub witness: Option<Witness>,
    pub fitted: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    fn new(assumption: &str) -> Self {
        Self {
            assumption: assumption.to_string(),
            pass: true,
            witness: None,
            fitted: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn fail_with(&mut self, w: Witness) {
        self.pass = false;
        self.witness = Some(w);
    }
}

/// Lattice densities for brute-force sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleDensity {
    /// Ball centers per axis over the domain bounding box.
    pub centers: usize,
    /// Lattice nodes per axis over each ball's bounding box.
    pub ball: usize,
    /// Number of `xi` samples.
    pub xi: usize,
}

impl Default for SampleDensity {
    fn default() -> Self {
        Self { centers: 9, ball: 32, xi: 64 }
    }
}

fn checked(spec: &dyn NFunction, x: &[f64], xi: f64) -> Result<f64> {
    let v = spec.eval(x, xi);
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Evaluation { x: x.to_vec(), xi, value: v })
    }
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs().max(lhs.abs())
}

fn nonempty(xs: &[Vec<f64>], xis: &[f64]) -> Result<()> {
    if xs.is_empty() || xis.is_empty() {
        return Err(Error::Precondition("sample sets must be nonempty".into()));
    }
    Ok(())
}

/// Doubling: `psi(x, 2 xi) <= C4 psi(x, xi)`.
pub fn check_delta2(spec: &dyn NFunction, xs: &[Vec<f64>], xis: &[f64]) -> Result<AssumptionReport> {
    nonempty(xs, xis)?;
    if xis.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("doubling samples need xi > 0".into()));
    }
    let c4 = spec.growth().c4;
    let mut rep = AssumptionReport::new("delta2");
    let mut worst: Option<(f64, Witness)> = None;
    for x in xs {
        for &xi in xis {
            let (a, b) = (checked(spec, x, 2.0 * xi)?, checked(spec, x, xi)?);
            let ratio = a / b;
            if worst.as_ref().map_or(true, |(r, _)| ratio > *r) {
                worst = Some((ratio, Witness { x: x.clone(), y: None, xi, lhs: a, rhs: c4 * b }));
            }
        }
    }
    let (ratio, w) = worst.expect("nonempty samples");
    rep.fitted.insert("C4_ratio".into(), ratio);
    if leq(w.lhs, w.rhs) {
        rep.witness = Some(w);
    } else {
        rep.fail_with(w);
    }
    Ok(rep)
}

/// Growth: `C1 xi^p <= psi(x, xi)` for `xi >= xi0` and
/// `psi(x, xi) <= C2 (1 + xi^q)` everywhere.
pub fn check_pq_growth(spec: &dyn NFunction, xs: &[Vec<f64>], xis: &[f64]) -> Result<AssumptionReport> {
    nonempty(xs, xis)?;
    let g = spec.growth().clone();
    let mut rep = AssumptionReport::new("pq_growth");
    let mut c1_fit = f64::INFINITY;
    let mut c2_fit: f64 = 0.0;
    let mut worst: Option<Witness> = None;
    for x in xs {
        for &xi in xis {
            let v = checked(spec, x, xi)?;
            let up = g.c2 * (1.0 + xi.powf(g.q));
            c2_fit = c2_fit.max(v / (1.0 + xi.powf(g.q)));
            let mut cands = vec![Witness { x: x.clone(), y: None, xi, lhs: v, rhs: up }];
            if xi >= g.xi0 {
                c1_fit = c1_fit.min(v / xi.powf(g.p));
                cands.push(Witness { x: x.clone(), y: None, xi, lhs: g.c1 * xi.powf(g.p), rhs: v });
            }
            for w in cands {
                let bad = !leq(w.lhs, w.rhs);
                if bad && worst.as_ref().map_or(true, |o| w.excess() > o.excess()) {
                    worst = Some(w);
                }
            }
        }
    }
    if c1_fit.is_finite() {
        rep.fitted.insert("C1_empirical".into(), c1_fit);
    } else {
        rep.notes.push(format!("no samples at or above xi0 = {}", g.xi0));
    }
    rep.fitted.insert("C2_empirical".into(), c2_fit);
    if let Some(w) = worst {
        rep.fail_with(w);
    }
    Ok(rep)
}

/// Hölder continuity in `x`: smallest `C3` with
/// `|psi(x1, xi) - psi(x2, xi)| <= C3 |x1 - x2|^alpha (1 + xi^q)`.
pub fn check_holder_in_x(
    spec: &DoublePhase,
    pairs: &[(Vec<f64>, Vec<f64>)],
    xis: &[f64],
) -> Result<AssumptionReport> {
    if pairs.is_empty() || xis.is_empty() {
        return Err(Error::Precondition("sample sets must be nonempty".into()));
    }
    let g = spec.growth();
    let mut rep = AssumptionReport::new("holder_in_x");
    let mut c3: f64 = 0.0;
    let mut worst: Option<Witness> = None;
    for (x1, x2) in pairs {
        let r: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        for &xi in xis {
            let diff = (checked(spec, x1, xi)? - checked(spec, x2, xi)?).abs();
            if r == 0.0 {
                continue;
            }
            let scale = r.powf(g.alpha) * (1.0 + xi.powf(g.q));
            if diff / scale > c3 {
                c3 = diff / scale;
                worst = Some(Witness {
                    x: x1.clone(),
                    y: Some(x2.clone()),
                    xi,
                    lhs: diff,
                    rhs: spec.holder() * scale,
                });
            }
        }
    }
    rep.fitted.insert("C3_empirical".into(), c3);
    match worst {
        Some(w) if !leq(w.lhs, w.rhs) => rep.fail_with(w),
        w => rep.witness = w,
    }
    Ok(rep)
}

/// `delta`, `M`, `N` from the double-phase continuity argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub delta: f64,
    pub m: f64,
    pub n: f64,
}

/// `delta = C1 / (C1 + 2 C3 D^(q-p))`, `M = max(1/delta, 1)`,
/// `N = C2 (1 + xi0^q)`.
pub fn lemma_constants(c1: f64, c3: f64, c2: f64, xi0: f64, p: f64, q: f64, d: f64) -> Result<LemmaConstants> {
    if !(d > 1.0) {
        return Err(Error::Domain(format!("D = {d} must exceed 1")));
    }
    if !(c1 > 0.0 && c2 > 0.0 && c3 >= 0.0 && xi0 > 0.0) {
        return Err(Error::Domain("constants must be positive".into()));
    }
    if !(q > p && p > 0.0) {
        return Err(Error::Domain("q must exceed p".into()));
    }
    let delta = c1 / (c1 + 2.0 * c3 * d.powf(q - p));
    Ok(LemmaConstants { delta, m: (1.0 / delta).max(1.0), n: c2 * (1.0 + xi0.powf(q)) })
}

/// Smallest `(M, N)` on the sweep `N in {0, 1, 2, 4, ...}`,
/// `M in {1, 2, 4, ...}` (smallest feasible `N` first, then its smallest
/// `M`) such that `hi <= M lo + N` for every pair.
pub fn fit_constants(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    const LEVELS: i32 = 40;
    let ns = std::iter::once(0.0).chain((0..LEVELS).map(|k| 2f64.powi(k)));
    for n in ns {
        let m = (0..LEVELS)
            .map(|k| 2f64.powi(k))
            .find(|&m| pairs.iter().all(|&(hi, lo)| leq(hi, m * lo + n)));
        if let Some(m) = m {
            return Some((m, n));
        }
    }
    None
}

fn lattice_centers(domain: &Domain, per_axis: usize) -> Vec<Vec<f64>> {
    let bb = domain.bbox();
    let c = bb.center();
    let half = bb.widths().iter().cloned().fold(0.0, f64::max) * 0.5;
    // square lattice over the bounding box, filtered to the domain
    let d = bb.dim();
    let m = per_axis.max(2);
    let total = m.pow(d as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut p = vec![0.0; d];
        for k in 0..d {
            let i = rest % m;
            rest /= m;
            p[k] = (c[k] - half + 2.0 * half * i as f64 / (m - 1) as f64).clamp(bb.min[k], bb.max[k]);
        }
        if domain.contains(&p) && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn xi_max(d: f64, gamma: f64, p: f64, dim: usize) -> f64 {
    d * gamma.powf(-(1.0f64).min(dim as f64 / p))
}

fn xi_samples(max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
}

fn check_gammas(d: f64, gammas: &[f64]) -> Result<()> {
    if !(d > 1.0) {
        return Err(Error::Domain(format!("D = {d} must exceed 1")));
    }
    if gammas.is_empty() || gammas.iter().any(|&g| !(g > 0.0 && g < 0.5)) {
        return Err(Error::Domain("gammas must lie in (0, 1/2)".into()));
    }
    Ok(())
}

/// Declared `(M, N)` budget of the continuity assumption for `spec`.
pub fn continuity_budget(spec: &NFunctionSpec, d: f64, gammas: &[f64]) -> Result<(f64, f64)> {
    let g = spec.growth();
    match spec {
        NFunctionSpec::Power(_) => Ok((1.0, g.c2 * (1.0 + g.xi0.powf(g.q)))),
        NFunctionSpec::DoublePhase(dp) => {
            let lc = lemma_constants(g.c1, dp.holder(), g.c2, g.xi0, g.p, g.q, d)?;
            Ok((lc.m, lc.n))
        }
        NFunctionSpec::VarExp(v) => {
            let (_, m) = varexp_budget(v, d, gammas)?;
            Ok((m, g.c2 * (1.0 + g.xi0.powf(g.q))))
        }
    }
}

/// Brute-force check of `psi(z, xi) <= M psi(y, xi) + N` for `y, z` in
/// `closure(B_gamma(x) ∩ Omega)` and `xi <= D gamma^(-min(1, d/p))`.
pub fn check_continuity_assumption(
    spec: &NFunctionSpec,
    domain: &Domain,
    d: f64,
    gammas: &[f64],
    density: SampleDensity,
) -> Result<AssumptionReport> {
    check_gammas(d, gammas)?;
    let g = spec.growth().clone();
    let (bm, bn) = continuity_budget(spec, d, gammas)?;
    let mut rep = AssumptionReport::new("continuity");
    rep.fitted.insert("budget_M".into(), bm);
    rep.fitted.insert("budget_N".into(), bn);
    let centers = lattice_centers(domain, density.centers);
    let mut pairs = Vec::new();
    let mut worst: Option<Witness> = None;
    for &gamma in gammas {
        let xis = xi_samples(xi_max(d, gamma, g.p, g.dim), density.xi);
        for x in &centers {
            let pts = ball_points(domain, x, gamma, density.ball);
            let extremes: Vec<(f64, usize, f64, usize)> = par::map(xis.len(), |k| {
                let mut hi = (f64::NEG_INFINITY, 0);
                let mut lo = (f64::INFINITY, 0);
                for (j, y) in pts.iter().enumerate() {
                    let v = spec.eval(y, xis[k]);
                    if v > hi.0 {
                        hi = (v, j);
                    }
                    if v < lo.0 {
                        lo = (v, j);
                    }
                }
                (hi.0, hi.1, lo.0, lo.1)
            });
            for (k, &(hi, zi, lo, yi)) in extremes.iter().enumerate() {
                if !hi.is_finite() || !lo.is_finite() || lo < 0.0 {
                    return Err(Error::Evaluation { x: pts[zi].clone(), xi: xis[k], value: hi });
                }
                pairs.push((hi, lo));
                let w = Witness { x: pts[zi].clone(), y: Some(pts[yi].clone()), xi: xis[k], lhs: hi, rhs: bm * lo + bn };
                if worst.as_ref().map_or(true, |o| w.excess() > o.excess()) {
                    worst = Some(w);
                }
            }
        }
    }
    match fit_constants(&pairs) {
        Some((m, n)) => {
            rep.fitted.insert("M".into(), m);
            rep.fitted.insert("N".into(), n);
        }
        None => rep.notes.push("no finite constants on the sweep".into()),
    }
    rep.notes.push(format!(
        "density: {} centers/axis, {} ball nodes/axis, {} xi samples",
        density.centers, density.ball, density.xi
    ));
    let w = worst.ok_or_else(|| Error::Precondition("no sample points in the domain".into()))?;
    if leq(w.lhs, w.rhs) {
        rep.witness = Some(w);
    } else {
        rep.notes.push("no finite constants at declared budget".into());
        rep.fail_with(w);
    }
    Ok(rep)
}

/// `(E, M)` for the variable-exponent quotient bound, with
/// `E = max_C D^(C / ln 2) e^C` over `C in {Cp, Cq}` (the supremum of
/// `D^(-C / ln gamma) e^(C min(1, d/p))` over `gamma in (0, 1/2)`) and
/// `M = E (E^2 + D^(alpha max(1, p/d)) |a|_alpha + 1)`.
pub fn varexp_budget(spec: &VarExpDoublePhase, d: f64, gammas: &[f64]) -> Result<(f64, f64)> {
    check_gammas(d, gammas)?;
    let g = spec.growth();
    let e = [spec.cp(), spec.cq()]
        .iter()
        .map(|&c| d.powf(c / std::f64::consts::LN_2) * c.exp())
        .fold(1.0, f64::max);
    let dim = g.dim as f64;
    let m = e * (e * e + d.powf(g.alpha * (g.p / dim).max(1.0)) * spec.holder() + 1.0);
    Ok((e, m))
}

/// Quotient `phi(x, xi) / phi(y, xi) <= M` for `|x - y| <= gamma` and
/// `1 <= xi <= D gamma^(-min(1, d/p))`.
pub fn check_varexp_quotient(
    spec: &VarExpDoublePhase,
    domain: &Domain,
    d: f64,
    gammas: &[f64],
    density: SampleDensity,
) -> Result<AssumptionReport> {
    let g = spec.growth().clone();
    if !super::growth::exponent_range_ok(g.p, g.q, g.alpha, g.dim)? {
        return Err(Error::Precondition("exponents outside q <= p + alpha max(1, p/d)".into()));
    }
    let (e, m) = varexp_budget(spec, d, gammas)?;
    let mut rep = AssumptionReport::new("varexp_quotient");
    rep.fitted.insert("E".into(), e);
    rep.fitted.insert("M".into(), m);
    let centers = lattice_centers(domain, density.centers);
    let mut worst: Option<(f64, Witness)> = None;
    for &gamma in gammas {
        let xmax = xi_max(d, gamma, g.p, g.dim).max(1.0);
        let n = density.xi.max(2);
        let xis: Vec<f64> = (0..n).map(|k| 1.0 + (xmax - 1.0) * k as f64 / (n - 1) as f64).collect();
        for x in &centers {
            let pts = ball_lattice(x, gamma, density.ball);
            for y in pts.iter().filter(|y| domain.contains(y)) {
                for &xi in &xis {
                    let (a, b) = (checked(spec, x, xi)?, checked(spec, y, xi)?);
                    for (num, den, p1, p2) in [(a, b, x, y), (b, a, y, x)] {
                        let qt = num / den;
                        if worst.as_ref().map_or(true, |(w, _)| qt > *w) {
                            worst = Some((qt, Witness { x: p1.clone(), y: Some(p2.clone()), xi, lhs: num, rhs: m * den }));
                        }
                    }
                }
            }
        }
    }
    let (qt, w) = worst.ok_or_else(|| Error::Precondition("no sample points in the domain".into()))?;
    rep.fitted.insert("max_quotient".into(), qt);
    if leq(w.lhs, w.rhs) {
        rep.witness = Some(w);
    } else {
        rep.fail_with(w);
    }
    Ok(rep)
}

/// Sandwich inequalities for `psi**_{x,gamma}`:
/// `0 <= psi** <= psi(y, .)` and `psi(y, xi) <= M psi**(xi) + N` for
/// sampled `y` in `closure(B_gamma(x) ∩ Omega)` and
/// `xi in [0, D gamma^(-min(1, d/p))]`. The smallest swept pair is
/// reported as `fitted_M`, `fitted_N`.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    spec: &NFunctionSpec,
    x: &[f64],
    gamma: f64,
    d: f64,
    m: f64,
    n: f64,
    domain: &Domain,
    density: SampleDensity,
) -> Result<AssumptionReport> {
    check_gammas(d, &[gamma])?;
    let g = spec.growth().clone();
    let xis = xi_samples(xi_max(d, gamma, g.p, g.dim), density.xi);
    let env = super::envelope::infimal_envelope(spec, x, gamma, domain, &xis, density.ball)?;
    let star = biconjugate(&env.function).to_f64();
    let mut rep = AssumptionReport::new("sandwich");
    let mut worst_g1: Option<Witness> = None;
    let mut worst_g2: Option<Witness> = None;
    let mut pairs = Vec::with_capacity(xis.len());
    for (k, &xi) in xis.iter().enumerate() {
        let s = star[k];
        if s < 0.0 {
            worst_g2 = Some(Witness { x: x.to_vec(), y: None, xi, lhs: 0.0, rhs: s });
        }
        let mut hi: f64 = 0.0;
        for y in &env.points {
            let v = checked(spec, y, xi)?;
            hi = hi.max(v);
            if s > v && worst_g2.is_none() {
                worst_g2 = Some(Witness { x: x.to_vec(), y: Some(y.clone()), xi, lhs: s, rhs: v });
            }
            let w = Witness { x: x.to_vec(), y: Some(y.clone()), xi, lhs: v, rhs: m * s + n };
            if worst_g1.as_ref().map_or(true, |o| w.excess() > o.excess()) {
                worst_g1 = Some(w);
            }
        }
        pairs.push((hi, s));
    }
    if let Some((fm, fnn)) = fit_constants(&pairs) {
        rep.fitted.insert("fitted_M".into(), fm);
        rep.fitted.insert("fitted_N".into(), fnn);
    }
    rep.fitted.insert("points".into(), env.points.len() as f64);
    if let Some(w) = worst_g2 {
        rep.notes.push("G2 violated".into());
        rep.fail_with(w);
        return Ok(rep);
    }
    let w = worst_g1.expect("nonempty samples");
    if leq(w.lhs, w.rhs) {
        rep.witness = Some(w);
    } else {
        rep.notes.push("G1 violated".into());
        rep.fail_with(w);
    }
    Ok(rep)
}
