use molab_core::geometry::Domain;
use molab_core::nfunctions::{
    biconjugate, exponent_range_ok, infimal_envelope, legendre, CoefficientMap, DoublePhase, NFunction,
    NFunctionSpec, PowerLaw, Sampled1D,
};
use proptest::prelude::*;

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64 * 4.0 - 2.0).collect()
}

fn sampled(values: Vec<f64>) -> Sampled1D {
    Sampled1D::new(grid(values.len()), values).unwrap()
}

fn specs() -> Vec<NFunctionSpec> {
    vec![
        NFunctionSpec::Power(PowerLaw::new(1.5, 2).unwrap()),
        NFunctionSpec::DoublePhase(
            DoublePhase::with_defaults(2.0, 2.4, 0.5, 2, CoefficientMap::AbsPow { axis: 0, alpha: 0.5, scale: 1.0 }, 1.0)
                .unwrap(),
        ),
        NFunctionSpec::DoublePhase(
            DoublePhase::with_defaults(1.5, 3.2, 1.0, 2, CoefficientMap::Checkerboard { scale: 1.0 }, 0.5).unwrap(),
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convexity_in_xi(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0, a in 0.0f64..30.0, b in 0.0f64..30.0) {
        for s in specs() {
            let x = [x0, x1];
            let mid = s.eval(&x, 0.5 * (a + b));
            let avg = 0.5 * (s.eval(&x, a) + s.eval(&x, b));
            prop_assert!(mid <= avg + 1e-12 * avg.max(1.0));
        }
    }

    #[test]
    fn biconjugate_is_idempotent(values in prop::collection::vec(0.0f64..10.0, 3..120)) {
        let once = biconjugate(&sampled(values));
        let twice = biconjugate(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn conjugation_reverses_order(pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 3..80)) {
        let f: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let g: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
        let (fs, gs) = (sampled(f), sampled(g));
        let etas: Vec<f64> = (0..41).map(|i| i as f64 * 0.5 - 10.0).collect();
        let (lf, lg) = (legendre(&fs, &etas).unwrap().to_f64(), legendre(&gs, &etas).unwrap().to_f64());
        prop_assert!(lg.iter().zip(&lf).all(|(a, b)| a <= b));
        let (bf, bg) = (biconjugate(&fs).to_f64(), biconjugate(&gs).to_f64());
        prop_assert!(bf.iter().zip(&bg).all(|(a, b)| a <= b));
    }

    #[test]
    fn exponent_range_is_monotone(p in 1.01f64..6.0, dq in 0.01f64..3.0, alpha in 0.01f64..1.0,
                                  shrink in 0.0f64..1.0, grow in 0.0f64..1.0, d in 1usize..4) {
        let q = p + dq;
        if exponent_range_ok(p, q, alpha, d).unwrap() {
            let q2 = p + dq * shrink.max(1e-3);
            let a2 = alpha + (1.0 - alpha) * grow;
            prop_assert!(exponent_range_ok(p, q2, alpha, d).unwrap());
            prop_assert!(exponent_range_ok(p, q, a2, d).unwrap());
        }
    }
}

#[test]
fn envelope_is_below_every_sampled_point() {
    let square = Domain::unit_square();
    let xis: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
    for s in specs() {
        for x in [[0.1, 0.2], [0.5, 0.5], [0.95, 0.0]] {
            let env = infimal_envelope(&s, &x, 0.1, &square, &xis, 9).unwrap();
            let vals = env.function.to_f64();
            for y in &env.points {
                for (k, &xi) in xis.iter().enumerate() {
                    assert!(vals[k] <= s.eval(y, xi));
                }
            }
        }
    }
}
