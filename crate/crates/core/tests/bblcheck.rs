use epitrace::bblcheck::*;
use epitrace::extgrid::GridSpec;
use epitrace::fixtures::*;
use epitrace::quad::QuadSpec;
use epitrace::*;

fn domains() -> Vec<EpigraphDomain> {
    vec![EpigraphDomain::half_space(2), EpigraphDomain::cone(2, 1.0).unwrap()]
}

#[test]
fn derived_gap_vanishes_for_extremals() {
    let norm = NormSpec::Euclidean;
    for dom in domains() {
        for (a, p) in [(2.0, 1.2), (3.0, 1.5), (2.5, 1.5)] {
            let params = BblParams::new(2, a, p).unwrap();
            let pair = ExtremalPair::new(&dom, &norm, &params, &QuadSpec::default()).unwrap();
            let r = derived_gap(&pair.g, &pair.w, &params, &dom, &norm, &QuadSpec::default(), None).unwrap();
            assert!(r.gap.abs() < 1e-8, "{:?} a={a}: gap {}", dom.kind(), r.gap);
            if a == 2.0 {
                assert_eq!(r.terms["volume"], 0.0);
            }
        }
    }
}

#[test]
fn derived_gap_positive_for_bump() {
    let norm = NormSpec::Euclidean;
    let dom = EpigraphDomain::half_space(2);
    let params = BblParams::new(2, 3.0, 1.5).unwrap();
    let pair = ExtremalPair::new(&dom, &norm, &params, &QuadSpec::default()).unwrap();
    let g = Sum { base: pair.g.clone(), extra: Bump { center: vec![0.0, 0.5], radius: 1.0, amp: 1.0 } };
    let r = derived_gap(&g, &pair.w, &params, &dom, &norm, &QuadSpec::default(), None).unwrap();
    assert!(r.gap > r.quadrature_error_estimate, "{} ± {}", r.gap, r.quadrature_error_estimate);
}

#[test]
fn grid_gap_of_extremals_within_error() {
    let norm = NormSpec::Euclidean;
    for dom in domains() {
        let params = BblParams::new(2, 3.0, 1.5).unwrap();
        let pair = ExtremalPair::new(&dom, &norm, &params, &QuadSpec::default()).unwrap();
        let (g, w) = pair.sample(&dom, 6.0, 49, None).unwrap();
        for h in [0.25, 1.0] {
            let r = bbl_gap(&g, &w, &params.with_h(h).unwrap(), Some(pair.tail(6.0))).unwrap();
            assert!(r.gap.abs() <= r.quadrature_error_estimate, "{:?} h={h}: {} vs {}", dom.kind(), r.gap, r.quadrature_error_estimate);
            assert!(r.tail > 0.0 && r.tail < r.quadrature_error_estimate);
        }
    }
}

#[test]
fn grid_gap_argument_checks() {
    let dom = EpigraphDomain::half_space(2);
    let params = BblParams::new(2, 2.0, 1.2).unwrap();
    let pair = ExtremalPair::new(&dom, &NormSpec::Euclidean, &params, &QuadSpec::default()).unwrap();
    let (g, w) = pair.sample(&dom, 3.0, 9, None).unwrap();
    assert!(matches!(bbl_gap(&g, &w, &params, None), Err(Error::InvalidArgument(_))));
    let (g, w) = pair.sample(&dom, 3.0, 10, None).unwrap();
    assert!(matches!(bbl_gap(&g, &w, &params.with_h(0.5).unwrap(), None), Err(Error::InvalidArgument(_))));
}

#[test]
fn appendix_split_on_half_space() {
    let norm = NormSpec::Euclidean;
    let dom = EpigraphDomain::half_space(2);
    let params = BblParams::new(2, 2.0, 1.5).unwrap();
    let pair = ExtremalPair::new(&dom, &norm, &params, &QuadSpec::default()).unwrap();
    let r = appendix_limit_residual(&pair.g, &pair.w, &params, &dom, &norm, &[0.01], &QuadSpec::mapped(0.1), None).unwrap();
    let row = &r.rows[0];
    assert!((row.term_ii / r.boundary - 1.0).abs() < 0.02, "{} vs {}", row.term_ii, r.boundary);
    assert_eq!(row.term_iii, 0.0);
    assert!(row.residual.abs() < 1e-3);
}

#[test]
fn appendix_third_term_cone_vs_paraboloid() {
    let norm = NormSpec::Euclidean;
    let params = BblParams::new(2, 2.5, 1.5).unwrap();
    let quad = QuadSpec::mapped(0.1);
    let cone = EpigraphDomain::cone(2, 1.0).unwrap();
    let pair = ExtremalPair::new(&cone, &norm, &params, &QuadSpec::default()).unwrap();
    let r = appendix_limit_residual(&pair.g, &pair.w, &params, &cone, &norm, &[0.25], &quad, None).unwrap();
    assert_eq!(r.rows[0].term_iii, 0.0);

    let para = EpigraphDomain::paraboloid(2, 1.0).unwrap();
    let pair = ExtremalPair::new(&para, &norm, &params, &QuadSpec::default()).unwrap();
    let r = appendix_limit_residual(&pair.g, &pair.w, &params, &para, &norm, &[0.25, 0.1], &quad, None).unwrap();
    assert!(r.rows[0].term_iii > 0.1);
    let res = r.residuals();
    assert!(res[1].abs() < res[0].abs());
    assert!(r.warnings.iter().any(|w| w.contains("growth condition")));
}

const KAPPA: f64 = 1.0233267079464885;

fn radial() -> (RadialPower, GridSpec, GapTail) {
    let w = RadialPower { kappa: KAPPA, m: 2.0, n: 2 };
    let grid = GridSpec::new(vec![-4.0, -4.0], vec![4.0, 4.0], vec![41, 41]).unwrap();
    (w, grid, GapTail { gamma: 4.0, a1: KAPPA, a3: KAPPA, radius: 4.0 })
}

#[test]
fn equivalence_scan_equal_pair() {
    let (w, grid, tail) = radial();
    let r = equivalence_scan(&w, &w, 2, &[0.1, 0.5, 1.0], &grid, 0.02, Some(tail)).unwrap();
    assert!((r.phi0 - 1.0).abs() < 1e-12);
    assert!(r.phi_above_one);
    assert!(r.agrees, "{} vs {} ± {}", r.richardson, r.integral, r.tolerance);
    // the statement-b integral is nonnegative up to truncation
    assert!(r.integral >= -r.tail[0] - r.integral_error);
}

#[test]
fn equivalence_scan_bumped_pair() {
    let (w, grid, tail) = radial();
    let g = Sum { base: w, extra: Bump { center: vec![0.5, 0.0], radius: 1.5, amp: 1.0 } };
    let r = equivalence_scan(&g, &w, 2, &[0.1, 0.25], &grid, 0.02, Some(tail)).unwrap();
    assert!(r.phi.iter().all(|p| *p > 1.0));
    assert!(r.integral > 0.0);
    assert!((r.richardson / r.integral - 1.0).abs() < 0.05);
    assert!(r.agrees);
}

#[test]
fn equivalence_scan_rejects_even_grid() {
    let (w, _, _) = radial();
    let grid = GridSpec::new(vec![-4.0, -4.0], vec![4.0, 4.0], vec![40, 40]).unwrap();
    assert!(equivalence_scan(&w, &w, 2, &[0.1], &grid, 0.02, None).is_err());
}
