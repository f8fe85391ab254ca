use molab_core::fields::{Centering, Grid};
use molab_core::geometry::{
    ball_squeeze_point, build_cover, build_partition, shrink_factor, Domain, Region,
};
use proptest::prelude::*;

fn fixture_domains() -> Vec<Domain> {
    vec![
        Domain::unit_square(),
        Domain::unit_ball(2),
        Domain::l_shape(),
        Domain::polygon(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]).unwrap(),
    ]
}

/// `x0 + kappa (U - x0) + eps B` stays inside `U` for every piece.
#[test]
fn shrunk_pieces_keep_an_eps_collar() {
    for omega in fixture_domains() {
        let cover = build_cover(&omega).unwrap();
        let r = cover.r;
        for eps in [r / 100.0, r / 16.0, r / 8.0] {
            let kappa = shrink_factor(eps, r).unwrap();
            for (i, piece) in cover.pieces.iter().enumerate() {
                let region = cover.piece_region(i);
                let bb = region.bbox();
                let n = 40;
                for a in 0..=n {
                    for b in 0..=n {
                        let x = [
                            bb.min[0] + (bb.max[0] - bb.min[0]) * a as f64 / n as f64,
                            bb.min[1] + (bb.max[1] - bb.min[1]) * b as f64 / n as f64,
                        ];
                        if !region.contains(&x) {
                            continue;
                        }
                        let c = &piece.center;
                        let shrunk = [c[0] + kappa * (x[0] - c[0]), c[1] + kappa * (x[1] - c[1])];
                        for k in 0..16 {
                            let t = k as f64 * std::f64::consts::PI / 8.0;
                            let z = [shrunk[0] + eps * t.cos(), shrunk[1] + eps * t.sin()];
                            assert!(region.contains(&z), "piece {i} eps {eps}: {z:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn partition_sums_to_one_wherever_defined() {
    for omega in fixture_domains() {
        let cover = build_cover(&omega).unwrap();
        let grid = Grid::covering(&omega.bbox(), 64, 0.0, 0.2, Centering::Cell).unwrap();
        let s = 2.5 * grid.h();
        let pou = build_partition(&cover, &grid, s).unwrap();
        for i in 0..grid.len() {
            let sum: f64 = pou.weights.iter().map(|w| w.values()[i]).sum();
            assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-14);
            if omega.contains(&grid.point(i)) {
                assert!((sum - 1.0).abs() < 1e-14);
            }
        }
    }
}

fn polar(r: f64, t: f64) -> [f64; 2] {
    [r * t.cos(), r * t.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn ball_rim_maps_outside(eps in 0.001f64..0.2499, r in 0.0f64..1.0, t in 0.0f64..6.3,
                             ry in 0.0f64..1.0, ty in 0.0f64..6.3) {
        let x = polar(1.0 - eps + eps * r, t);
        let y = polar(eps * ry, ty);
        let z = ball_squeeze_point(&x, eps, &y);
        prop_assert!(z[0].hypot(z[1]) > 1.0);
    }

    #[test]
    fn ball_squeeze_is_five_eps_local(eps in 0.001f64..0.25, r in 0.0f64..1.0, t in 0.0f64..6.3,
                                      ry in 0.0f64..1.0, ty in 0.0f64..6.3) {
        let x = polar(r, t);
        let y = polar(eps * ry, ty);
        let z = ball_squeeze_point(&x, eps, &y);
        prop_assert!((z[0] - x[0]).hypot(z[1] - x[1]) <= 5.0 * eps);
    }
}
