use serde::{Deserialize, Serialize};

use super::growth::GrowthData;
use super::maps::{CoefficientMap, ExponentMap};
use crate::{Error, Result};

/// An N-function `psi(x, xi)` with growth metadata.
pub trait NFunction: Sync {
    fn growth(&self) -> &GrowthData;
    /// `psi(x, xi)` for `xi >= 0`.
    fn eval(&self, x: &[f64], xi: f64) -> f64;
    /// `d psi / d xi` at `(x, xi)`.
    fn deriv(&self, x: &[f64], xi: f64) -> f64;
    /// A strictly increasing superlinear minorant `m_psi(xi) <= psi(x, xi)`.
    fn lower_envelope(&self, xi: f64) -> f64;
    /// Whether `psi` depends on `x` at all.
    fn x_dependent(&self) -> bool {
        true
    }
}

/// `psi(xi) = xi^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    growth: GrowthData,
}

impl PowerLaw {
    /// The growth record uses `q = p + 1`, `C1 = C2 = 1`, `C4 = 2^p`; any
    /// `q > p` is a valid upper exponent for a pure power.
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        let growth = GrowthData::new(p, p + 1.0, 1.0, 1.0, 1.0, 1.0, 2f64.powf(p), dim)?;
        Ok(Self { growth })
    }

    pub fn with_growth(growth: GrowthData) -> Self {
        Self { growth }
    }
}

impl NFunction for PowerLaw {
    fn growth(&self) -> &GrowthData {
        &self.growth
    }
    fn eval(&self, _x: &[f64], xi: f64) -> f64 {
        xi.powf(self.growth.p)
    }
    fn deriv(&self, _x: &[f64], xi: f64) -> f64 {
        self.growth.p * xi.powf(self.growth.p - 1.0)
    }
    fn lower_envelope(&self, xi: f64) -> f64 {
        xi.powf(self.growth.p)
    }
    fn x_dependent(&self) -> bool {
        false
    }
}

/// `psi(x, xi) = xi^p + a(x) xi^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublePhase {
    growth: GrowthData,
    coefficient: CoefficientMap,
    holder: f64,
}

impl DoublePhase {
    pub fn new(growth: GrowthData, coefficient: CoefficientMap, holder: f64) -> Result<Self> {
        if !coefficient.is_nonnegative() {
            return Err(Error::Domain("coefficient a must be nonnegative".into()));
        }
        if !(holder >= 0.0 && holder.is_finite()) {
            return Err(Error::Domain("Hölder seminorm must be finite and nonnegative".into()));
        }
        Ok(Self { growth, coefficient, holder })
    }

    /// Growth defaults from [`GrowthData::double_phase`] with `sup a` supplied
    /// by the caller, and the closed-form seminorm of the coefficient.
    pub fn with_defaults(
        p: f64,
        q: f64,
        alpha: f64,
        dim: usize,
        coefficient: CoefficientMap,
        sup_a: f64,
    ) -> Result<Self> {
        let holder = coefficient.nominal_seminorm(alpha).ok_or_else(|| {
            Error::Domain("no closed-form Hölder seminorm for this coefficient; supply one".into())
        })?;
        Self::new(GrowthData::double_phase(p, q, alpha, dim, sup_a)?, coefficient, holder)
    }

    pub fn coefficient(&self) -> &CoefficientMap {
        &self.coefficient
    }

    /// Declared `|a|_alpha`.
    pub fn holder(&self) -> f64 {
        self.holder
    }

    pub fn a(&self, x: &[f64]) -> f64 {
        self.coefficient.eval(x)
    }
}

impl NFunction for DoublePhase {
    fn growth(&self) -> &GrowthData {
        &self.growth
    }
    fn eval(&self, x: &[f64], xi: f64) -> f64 {
        xi.powf(self.growth.p) + self.coefficient.eval(x) * xi.powf(self.growth.q)
    }
    fn deriv(&self, x: &[f64], xi: f64) -> f64 {
        let g = &self.growth;
        g.p * xi.powf(g.p - 1.0) + self.coefficient.eval(x) * g.q * xi.powf(g.q - 1.0)
    }
    fn lower_envelope(&self, xi: f64) -> f64 {
        xi.powf(self.growth.p)
    }
    fn x_dependent(&self) -> bool {
        !matches!(self.coefficient, CoefficientMap::Const(_))
    }
}

/// `psi(x, xi) = xi^{p(x)} + a(x) xi^{q(x)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarExpDoublePhase {
    growth: GrowthData,
    p_of_x: ExponentMap,
    q_of_x: ExponentMap,
    cp: f64,
    cq: f64,
    coefficient: CoefficientMap,
    holder: f64,
}

impl VarExpDoublePhase {
    /// The global exponents `growth.p`, `growth.q` must bracket the ranges of
    /// `p(x)` and `q(x)`, and `p(x) <= q(x)` pointwise.
    pub fn new(
        growth: GrowthData,
        p_of_x: ExponentMap,
        q_of_x: ExponentMap,
        cp: f64,
        cq: f64,
        coefficient: CoefficientMap,
        holder: f64,
    ) -> Result<Self> {
        if p_of_x.min_value() < growth.p - 1e-12 || q_of_x.max_value() > growth.q + 1e-12 {
            return Err(Error::Domain(format!(
                "exponent maps must satisfy p <= p(x), q(x) <= q with p = {}, q = {}",
                growth.p, growth.q
            )));
        }
        // overlapping ranges are fine when both maps share one oscillation
        let same_shape = matches!(
            (&p_of_x, &q_of_x),
            (
                ExponentMap::SinPerturb { axis: a1, amplitude: m1, frequency: f1, base: b1 },
                ExponentMap::SinPerturb { axis: a2, amplitude: m2, frequency: f2, base: b2 },
            ) if a1 == a2 && m1 == m2 && f1 == f2 && b1 <= b2
        );
        if p_of_x.max_value() > q_of_x.min_value() + 1e-12 && !same_shape {
            return Err(Error::Domain("p(x) <= q(x) cannot be guaranteed".into()));
        }
        if !coefficient.is_nonnegative() {
            return Err(Error::Domain("coefficient a must be nonnegative".into()));
        }
        if cp < 0.0 || cq < 0.0 || holder < 0.0 {
            return Err(Error::Domain("log-Hölder and Hölder constants must be nonnegative".into()));
        }
        Ok(Self { growth, p_of_x, q_of_x, cp, cq, coefficient, holder })
    }

    pub fn p_of_x(&self) -> &ExponentMap {
        &self.p_of_x
    }
    pub fn q_of_x(&self) -> &ExponentMap {
        &self.q_of_x
    }
    pub fn cp(&self) -> f64 {
        self.cp
    }
    pub fn cq(&self) -> f64 {
        self.cq
    }
    pub fn holder(&self) -> f64 {
        self.holder
    }
    pub fn coefficient(&self) -> &CoefficientMap {
        &self.coefficient
    }
}

impl NFunction for VarExpDoublePhase {
    fn growth(&self) -> &GrowthData {
        &self.growth
    }
    fn eval(&self, x: &[f64], xi: f64) -> f64 {
        xi.powf(self.p_of_x.eval(x)) + self.coefficient.eval(x) * xi.powf(self.q_of_x.eval(x))
    }
    fn deriv(&self, x: &[f64], xi: f64) -> f64 {
        let px = self.p_of_x.eval(x);
        let qx = self.q_of_x.eval(x);
        px * xi.powf(px - 1.0) + self.coefficient.eval(x) * qx * xi.powf(qx - 1.0)
    }
    fn lower_envelope(&self, xi: f64) -> f64 {
        if xi >= 1.0 {
            xi.powf(self.growth.p)
        } else {
            xi.powf(self.growth.q)
        }
    }
}

/// Closed set of N-function families used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NFunctionSpec {
    Power(PowerLaw),
    DoublePhase(DoublePhase),
    VarExp(VarExpDoublePhase),
}

impl NFunctionSpec {
    fn inner(&self) -> &dyn NFunction {
        match self {
            NFunctionSpec::Power(f) => f,
            NFunctionSpec::DoublePhase(f) => f,
            NFunctionSpec::VarExp(f) => f,
        }
    }
}

impl NFunction for NFunctionSpec {
    fn growth(&self) -> &GrowthData {
        self.inner().growth()
    }
    fn eval(&self, x: &[f64], xi: f64) -> f64 {
        self.inner().eval(x, xi)
    }
    fn deriv(&self, x: &[f64], xi: f64) -> f64 {
        self.inner().deriv(x, xi)
    }
    fn lower_envelope(&self, xi: f64) -> f64 {
        self.inner().lower_envelope(xi)
    }
    fn x_dependent(&self) -> bool {
        self.inner().x_dependent()
    }
}
