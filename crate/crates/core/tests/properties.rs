use epitrace::hopflax::hopflax_apply;
use epitrace::quad::QuadSpec;
use epitrace::sharpconst::i_alpha;
use epitrace::transforms::{default_dual_box, legendre_nd};
use epitrace::*;
use proptest::prelude::*;

fn any_domain() -> impl Strategy<Value = EpigraphDomain> {
    prop_oneof![
        Just(EpigraphDomain::half_space(2)),
        (0.2..3.0f64).prop_map(|s| EpigraphDomain::cone(2, s).unwrap()),
        (0.1..2.0f64).prop_map(|c| EpigraphDomain::paraboloid(2, c).unwrap()),
        (-2.0..0.0f64, 0.0..2.0f64, -1.0..0.0f64)
            .prop_map(|(a, b, c)| EpigraphDomain::affine_max(2, &[vec![a, 0.0], vec![b, c]]).unwrap()),
    ]
}

fn cone_domain() -> impl Strategy<Value = EpigraphDomain> {
    prop_oneof![Just(EpigraphDomain::half_space(2)), (0.2..3.0f64).prop_map(|s| EpigraphDomain::cone(2, s).unwrap())]
}

/// Convex quadratic plus a convex kink, sampled on [−1, 1]² at 9 nodes per axis.
fn convex_grid(c: [f64; 4]) -> ExtGridFn {
    let grid = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
    ExtGridFn::from_fn(grid, move |x| c[0] * x[0] * x[0] + c[1] * x[1] * x[1] + c[2] * x[0] + (x[0] - x[1]).abs() * c[3]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_h_inside_b_h(dom in any_domain(), x in prop::array::uniform2(-3.0..3.0f64), h in 0.0..2.0f64) {
        if dom.contains(&x, h).unwrap() {
            prop_assert!(dom.bh_membership(&x, h).unwrap());
        }
    }

    #[test]
    fn b_h_is_omega_h_on_cones(dom in cone_domain(), x in prop::array::uniform2(-3.0..3.0f64), h in 0.0..2.0f64) {
        prop_assert_eq!(dom.bh_membership(&x, h).unwrap(), dom.contains(&x, h).unwrap());
    }

    #[test]
    fn cone_weight_is_one(dom in cone_domain(), x1 in prop_oneof![-3.0..-0.01f64, 0.01..3.0f64]) {
        prop_assert!((dom.weight_p(&[x1]).0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn conjugation_reverses_order(c in prop::array::uniform4(0.0..2.0f64), bump in 0.0..1.0f64) {
        let f = convex_grid(c);
        let g = f.map(|v| v + bump).unwrap();
        let bx = default_dual_box(&f);
        let fs = legendre_nd(&f, &bx, &[11, 11]).unwrap();
        let gs = legendre_nd(&g, &bx, &[11, 11]).unwrap();
        for (a, b) in fs.values.values().iter().zip(gs.values.values()) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn conjugates_convex_along_axes(c in prop::array::uniform4(0.0..2.0f64)) {
        let f = convex_grid(c);
        let fs = legendre_nd(&f, &default_dual_box(&f), &[13, 13]).unwrap().values;
        let v = fs.values();
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..13 {
            for j in 1..12 {
                let row = v[i * 13 + j - 1] - 2.0 * v[i * 13 + j] + v[i * 13 + j + 1];
                let col = v[(j - 1) * 13 + i] - 2.0 * v[j * 13 + i] + v[(j + 1) * 13 + i];
                prop_assert!(row >= -1e-9 * scale && col >= -1e-9 * scale);
            }
        }
    }

    #[test]
    fn dual_of_dual_is_the_norm(p in 1.05..8.0f64, x in prop::array::uniform3(-5.0..5.0f64)) {
        let norm = NormSpec::PNorm { p };
        let back = norm.dual_spec().dual_spec();
        prop_assert!((back.norm(&x) - norm.norm(&x)).abs() <= 1e-10 * (1.0 + norm.norm(&x)));
    }

    #[test]
    fn hopf_lax_is_monotone_and_below_envelopes(
        c in prop::array::uniform4(0.0..2.0f64),
        bump in 0.0..1.0f64,
        h in 0.05..1.0f64,
        picks in prop::array::uniform3(0usize..49),
    ) {
        let g1 = convex_grid(c);
        let g2 = g1.map(|v| v + bump).unwrap();
        let w = ExtGridFn::from_fn(GridSpec::cube(2, -1.0, 1.0, 7).unwrap(), |y| y[0] * y[0] + y[1] * y[1]).unwrap();
        let q1 = hopflax_apply(&g1, &w, h).unwrap();
        let q2 = hopflax_apply(&g2, &w, h).unwrap();
        for (a, b) in q1.values.values().iter().zip(q2.values.values()) {
            prop_assert!(a <= b);
        }
        // exact: every finite node carries its minimiser
        for (k, v) in q1.values.values().iter().enumerate() {
            prop_assert_eq!(v.is_finite(), q1.argmin[k].is_some());
        }
        let grid = g1.grid();
        for &j in &picks {
            let y0 = w.grid().point_vec(j);
            for k in 0..grid.len() {
                let x = grid.point_vec(k);
                let shifted: Vec<f64> = x.iter().zip(&y0).map(|(a, b)| a - h * b).collect();
                let env = g1.interpolate(&shifted) + h * w.values()[j];
                prop_assert!(q1.values.values()[k] <= env);
            }
        }
    }
}

#[test]
fn i_alpha_monotone_in_alpha_and_aperture() {
    let quad = QuadSpec::mapped(0.1);
    let norm = NormSpec::Euclidean;
    let narrow = EpigraphDomain::cone(2, 2.0).unwrap();
    let wide = EpigraphDomain::cone(2, 0.5).unwrap();
    let mut last = f64::INFINITY;
    for alpha in [2.5, 3.0, 4.0, 6.0] {
        let v = i_alpha(&narrow, &norm, alpha, &quad).unwrap().value;
        assert!(v < last, "alpha {alpha}: {v} !< {last}");
        last = v;
        let w = i_alpha(&wide, &norm, alpha, &quad).unwrap().value;
        let hs = i_alpha(&EpigraphDomain::half_space(2), &norm, alpha, &quad).unwrap().value;
        assert!(v < w && w < hs, "alpha {alpha}: {v} {w} {hs}");
    }
}
