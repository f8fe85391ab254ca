//! Evaluable N-functions, empirical checks of their structural assumptions,
//! infimal envelopes and second convex conjugates.

mod checks;
mod conjugate;
mod envelope;
mod families;
mod growth;
mod maps;

pub use checks::{
    check_continuity_assumption, check_delta2, check_holder_in_x, check_pq_growth,
    check_varexp_quotient, continuity_budget, fit_constants, lemma_constants, sandwich_check, varexp_budget,
    AssumptionReport, LemmaConstants, SampleDensity, Witness, REL_TOL,
};
pub use conjugate::{biconjugate, biconjugate_via_legendre, legendre, ExtValue, Sampled1D};
pub use envelope::{infimal_envelope, Envelope};
pub use families::{DoublePhase, NFunction, NFunctionSpec, PowerLaw, VarExpDoublePhase};
pub use growth::{exponent_range_ok, GrowthData};
pub use maps::{CoefficientMap, ExponentMap};
