use epitrace::hopflax::{hopflax_apply, hopflax_apply_exhaustive, semigroup_residual};
use epitrace::*;

/// max over nodes finite at both h of |Q_h − Q_h'| / |h − h'|.
fn fitted_lipschitz(res: usize) -> f64 {
    let g = ExtGridFn::from_fn(GridSpec::cube(2, -1.0, 1.0, res).unwrap(), |x| (x[0] - 0.2).abs() + 0.5 * x[1] * x[1]).unwrap();
    let w = ExtGridFn::from_fn(GridSpec::cube(2, -2.0, 2.0, 2 * res - 1).unwrap(), |y| 0.5 * (y[0] * y[0] + y[1] * y[1])).unwrap();
    let hs = [0.1, 0.2, 0.3, 0.4];
    let qs: Vec<_> = hs.iter().map(|&h| hopflax_apply(&g, &w, h).unwrap().values).collect();
    let mut l = 0.0f64;
    for k in 1..hs.len() {
        for (a, b) in qs[k].values().iter().zip(qs[k - 1].values()) {
            if a.is_finite() && b.is_finite() {
                l = l.max((a - b).abs() / (hs[k] - hs[k - 1]));
            }
        }
    }
    l
}

#[test]
fn lipschitz_in_h_stays_bounded_under_refinement() {
    let coarse = fitted_lipschitz(11);
    let fine = fitted_lipschitz(21);
    assert!(coarse.is_finite() && fine.is_finite());
    // |∇g| ≤ 1.2 on the box, so W*(∇g) ≤ 0.72; the fitted constant must not blow up
    assert!(fine <= 2.0 * coarse.max(0.72), "{coarse} -> {fine}");
}

#[test]
fn fast_path_matches_exhaustive_loop() {
    let g = ExtGridFn::from_fn(GridSpec::cube(2, -1.0, 1.0, 15).unwrap(), |x| {
        if x[0] + x[1] > 1.2 {
            f64::INFINITY
        } else {
            x[0].abs() + (x[1] - 0.3).powi(2)
        }
    })
    .unwrap();
    let w = ExtGridFn::from_fn(GridSpec::cube(2, -1.5, 1.5, 13).unwrap(), |y| y[0].powi(4) + y[1] * y[1]).unwrap();
    for h in [0.0, 0.3, 1.0] {
        let a = hopflax_apply(&g, &w, h).unwrap();
        let b = hopflax_apply_exhaustive(&g, &w, h).unwrap();
        assert_eq!(a.values.values(), b.values.values(), "h = {h}");
        assert_eq!(a.argmin, b.argmin);
    }
}

#[test]
fn semigroup_residual_shrinks_with_grid() {
    let run = |res: usize| {
        let g = ExtGridFn::from_fn(GridSpec::cube(2, -2.0, 2.0, res).unwrap(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let w = ExtGridFn::from_fn(GridSpec::cube(2, -2.0, 2.0, res).unwrap(), |y| 0.5 * (y[0] * y[0] + y[1] * y[1])).unwrap();
        semigroup_residual(&g, &w, 0.6, 0.2).unwrap()
    };
    let (a, b) = (run(21), run(41));
    assert!(b <= a, "{a} -> {b}");
}
