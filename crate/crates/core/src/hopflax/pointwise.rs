//! Pointwise Hopf–Lax values for analytic g and W, by local search over y.

use crate::field::{gradient_or_fd, Cost, Field};
use crate::optim::pattern_search;

/// Q_h^W(g)(x) = inf_y g(x − h·y) + h·W(y), searched from the conjugate maximiser at
/// ∇g(x) (the h → 0 limit of the minimiser) and from `starts`. Returns (value, minimiser).
pub fn hopflax_pointwise(
    g: &(impl Field + ?Sized),
    w: &(impl Cost + ?Sized),
    h: f64,
    x: &[f64],
    starts: &[Vec<f64>],
) -> (f64, Option<Vec<f64>>) {
    if h == 0.0 {
        return (g.value(x), None);
    }
    let n = x.len();
    let obj = |y: &[f64]| {
        let wv = w.value(y);
        if !wv.is_finite() {
            return f64::INFINITY;
        }
        let p: Vec<f64> = (0..n).map(|d| x[d] - h * y[d]).collect();
        let gv = g.value(&p);
        if gv.is_finite() {
            gv + h * wv
        } else {
            f64::INFINITY
        }
    };
    let mut cands: Vec<Vec<f64>> = Vec::new();
    if g.value(x).is_finite() {
        if let Some(y) = w.conjugate_maximiser(&gradient_or_fd(g, x)) {
            cands.push(y);
        }
    }
    cands.extend(starts.iter().cloned());
    let mut best = (f64::INFINITY, None);
    for y0 in cands {
        if !obj(&y0).is_finite() {
            continue;
        }
        let scale = 1.0 + y0.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let (y, v) = pattern_search(obj, &y0, 0.25 * scale, 1e-12);
        if v < best.0 {
            best = (v, Some(y));
        }
    }
    best
}
