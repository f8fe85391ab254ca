use std::sync::Arc;

use molab_core::fields::{lp_norm, Centering, Grid, GridDomain, ScalarField};
use molab_core::geometry::{Domain, Region};
use molab_core::modular::{luxemburg_norm, modular};
use molab_core::nfunctions::{
    CoefficientMap, DoublePhase, ExponentMap, GrowthData, NFunction, NFunctionSpec, VarExpDoublePhase,
};
use proptest::prelude::*;

const TOL: f64 = 1e-8;
const N: usize = 12;

fn gd() -> Arc<GridDomain> {
    let d = Domain::unit_square();
    GridDomain::new(Grid::covering(&d.bbox(), N, 0.0, 0.0, Centering::Cell).unwrap(), d).unwrap()
}

fn field(gd: &Arc<GridDomain>, values: &[f64]) -> ScalarField {
    let mut v = vec![0.0; gd.grid().len()];
    let active: Vec<usize> = (0..v.len()).filter(|&i| gd.mask()[i]).collect();
    for (slot, x) in active.iter().zip(values.iter().cycle()) {
        v[*slot] = *x;
    }
    ScalarField::new(gd.clone(), v).unwrap()
}

fn specs() -> Vec<NFunctionSpec> {
    let g = GrowthData::new(1.9, 2.6, 0.5, 1.0, 1.0, 2.0, 2f64.powf(2.6), 2).unwrap();
    let varexp = VarExpDoublePhase::new(
        g,
        ExponentMap::SinPerturb { axis: 0, amplitude: 0.1, frequency: 3.0, base: 2.0 },
        ExponentMap::SinPerturb { axis: 0, amplitude: 0.1, frequency: 3.0, base: 2.5 },
        0.3 / std::f64::consts::E,
        0.3 / std::f64::consts::E,
        CoefficientMap::AbsPow { axis: 1, alpha: 0.5, scale: 1.0 },
        1.0,
    )
    .unwrap();
    vec![
        NFunctionSpec::DoublePhase(
            DoublePhase::with_defaults(2.0, 2.4, 0.5, 2, CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 }, 1.0)
                .unwrap(),
        ),
        NFunctionSpec::VarExp(varexp),
    ]
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..20.0, 1..40).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_absolutely_homogeneous(v in values(), alpha in -5.0f64..5.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let gd = gd();
        let f = field(&gd, &v);
        for s in specs() {
            let a = luxemburg_norm(&s, &f.scale(alpha), TOL).unwrap();
            let b = alpha.abs() * luxemburg_norm(&s, &f, TOL).unwrap();
            prop_assert!((a - b).abs() <= 2.0 * TOL * b, "{} {}", a, b);
        }
    }

    #[test]
    fn norm_satisfies_the_triangle_inequality(v in values(), w in values()) {
        let gd = gd();
        let (f, g) = (field(&gd, &v), field(&gd, &w));
        for s in specs() {
            let sum = luxemburg_norm(&s, &f.add(&g).unwrap(), TOL).unwrap();
            let bound = luxemburg_norm(&s, &f, TOL).unwrap() + luxemburg_norm(&s, &g, TOL).unwrap();
            prop_assert!(sum <= bound * (1.0 + 2.0 * TOL));
        }
    }

    #[test]
    fn normalized_field_lies_in_the_unit_ball(v in values()) {
        let gd = gd();
        let f = field(&gd, &v);
        for s in specs() {
            let n = luxemburg_norm(&s, &f, TOL).unwrap();
            let m = modular(&s, &f.scale(1.0 / n)).value;
            prop_assert!(m <= 1.0 + 10.0 * TOL);
            prop_assert!(m >= 1.0 - 10.0 * TOL);
        }
    }

    #[test]
    fn modular_and_norm_are_monotone(v in values(), bumps in prop::collection::vec(0.0f64..3.0, 1..40)) {
        let gd = gd();
        let f = field(&gd, &v.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let extra = field(&gd, &bumps);
        let g = f.add(&extra).unwrap();
        for s in specs() {
            prop_assert!(modular(&s, &f).value <= modular(&s, &g).value);
            prop_assert!(luxemburg_norm(&s, &f, TOL).unwrap() <= luxemburg_norm(&s, &g, TOL).unwrap() + TOL);
        }
    }

    /// `int |f|^p <= xi0^p |Omega| + modular(f) / C1`.
    #[test]
    fn lower_growth_controls_the_p_integral(v in values()) {
        let gd = gd();
        let f = field(&gd, &v);
        for s in specs() {
            let g = s.growth();
            let lhs = lp_norm(&f, g.p).unwrap().powf(g.p);
            let rhs = g.xi0.powf(g.p) * gd.omega_measure() + modular(&s, &f).value / g.c1;
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
