use epitrace::fixtures::{Bump, Dilated, Scaled, Sum};
use epitrace::quad::QuadSpec;
use epitrace::sharpconst::*;
use epitrace::*;

fn check(f: &dyn Field, params: &BblParams, dom: &EpigraphDomain, what: &str) -> f64 {
    let (r, _) = trace_gn_check(f, params, dom, &NormSpec::Euclidean, &QuadSpec::mapped(0.1)).unwrap();
    assert!(r.ratio <= 1.0 + r.quadrature_error, "{what}: ratio {} err {}", r.ratio, r.quadrature_error);
    r.ratio
}

#[test]
fn trace_ratios_bounded_across_fixtures() {
    let norm = NormSpec::Euclidean;
    for dom in [EpigraphDomain::half_space(2), EpigraphDomain::cone(2, 1.0).unwrap(), EpigraphDomain::cone(2, 0.4).unwrap()] {
        for (a, p) in [(2.0, 1.5), (2.5, 1.5), (3.0, 1.2)] {
            let params = BblParams::new(2, a, p).unwrap();
            let f = extremal_f(&params, &norm).unwrap().field();
            let r = check(&f, &params, &dom, "extremal");
            assert!((r - 1.0).abs() < 1e-6, "extremal ratio {r}");
            check(&Scaled { inner: f.clone(), factor: 7.0 }, &params, &dom, "scaled");
            for lambda in [0.5, 2.0] {
                // cones are dilation invariant, so dilates stay extremal
                let r = check(&Dilated { inner: f.clone(), lambda }, &params, &dom, "dilated");
                assert!((r - 1.0).abs() < 1e-4, "dilated ratio {r}");
            }
            let bump = Bump { center: vec![0.3, 0.8], radius: 1.2, amp: 1.0 };
            check(&bump, &params, &dom, "bump");
            check(&Sum { base: f.clone(), extra: bump }, &params, &dom, "extremal plus bump");
        }
    }
}

#[test]
fn refinement_shrinks_extremal_error() {
    let params = BblParams::new(2, 2.5, 1.5).unwrap();
    let f = extremal_f(&params, &NormSpec::Euclidean).unwrap().field();
    let dom = EpigraphDomain::cone(2, 1.0).unwrap();
    let rows = trace_refinement(&f, &params, &dom, &NormSpec::Euclidean, &[0.4, 0.2, 0.1]).unwrap();
    assert!(rows[1].1 < rows[0].1 && rows[2].1 < rows[1].1, "{rows:?}");
}

#[test]
fn trace_check_rejects_non_cones() {
    let params = BblParams::new(2, 2.5, 1.5).unwrap();
    let f = extremal_f(&params, &NormSpec::Euclidean).unwrap().field();
    let para = EpigraphDomain::paraboloid(2, 1.0).unwrap();
    assert!(trace_gn_check(&f, &params, &para, &NormSpec::Euclidean, &QuadSpec::mapped(0.1)).is_err());
}
