//! Discrete Legendre–Fenchel transforms.
//!
//! The 1-D transform locates the optimal vertex of the lower convex hull with a
//! monotone pointer (slopes visited in increasing order) and then rescans the original
//! samples between the neighbouring hull vertices, so the returned maximum is the exact
//! floating-point maximum of `x*y - f` with the smallest maximising index.

use crate::error::{Error, Result};
use crate::extgrid::{ExtGridFn, GridSpec};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct ConjugateResult {
    pub values: ExtGridFn,
    /// Flat primal index attaining each dual value (smallest on ties).
    pub argmax: Vec<usize>,
    pub dual_box: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conj1d {
    pub value: f64,
    pub argmax: usize,
}

#[inline]
fn affine(x: f64, y: f64, f: f64) -> f64 {
    x * y - f
}

/// Exact discrete conjugate max_i (xᵢ·y − fᵢ) for each slope y.
pub fn legendre_1d(xs: &[f64], fx: &[f64], slopes: &[f64]) -> Result<Vec<Conj1d>> {
    if xs.len() != fx.len() {
        return Err(Error::InvalidArgument("sample arrays differ in length".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample abscissae must be strictly increasing".into()));
    }
    if fx.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::InvalidArgument("samples must be real or +inf".into()));
    }
    let out = legendre_1d_raw(xs, fx, slopes);
    if out.is_empty() && !slopes.is_empty() || out.first().is_some_and(|c| c.value == f64::NEG_INFINITY) {
        return Err(Error::InvalidArgument("all samples are +inf; the conjugate is not proper".into()));
    }
    Ok(out)
}

/// As [`legendre_1d`] but an all-infinite line yields `-∞` with argmax 0.
pub(crate) fn legendre_1d_raw(xs: &[f64], fx: &[f64], slopes: &[f64]) -> Vec<Conj1d> {
    let fin: Vec<usize> = (0..xs.len()).filter(|&i| fx[i].is_finite()).collect();
    if fin.is_empty() {
        return slopes.iter().map(|_| Conj1d { value: f64::NEG_INFINITY, argmax: 0 }).collect();
    }
    let hull = lower_hull(xs, fx, &fin);
    let mut order: Vec<usize> = (0..slopes.len()).collect();
    order.sort_by(|&a, &b| slopes[a].total_cmp(&slopes[b]));
    let mut out = vec![Conj1d { value: f64::NEG_INFINITY, argmax: 0 }; slopes.len()];
    let hv = |k: usize, y: f64| affine(xs[hull[k]], y, fx[hull[k]]);
    let mut k = 0usize;
    for &j in &order {
        let y = slopes[j];
        while k + 1 < hull.len() && hv(k + 1, y) > hv(k, y) {
            k += 1;
        }
        // widen the window across hull vertices within a rounding band of the best value
        let best = hv(k, y);
        let band = 1e-9 * (best.abs() + (xs[hull[k]] * y).abs() + fx[hull[k]].abs()) + f64::MIN_POSITIVE;
        let mut lo = k;
        while lo > 0 && hv(lo - 1, y) >= best - band {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < hull.len() && hv(hi + 1, y) >= best - band {
            hi += 1;
        }
        let from = if lo > 0 { hull[lo - 1] } else { 0 };
        let to = if hi + 1 < hull.len() { hull[hi + 1] } else { xs.len() - 1 };
        let mut bv = f64::NEG_INFINITY;
        let mut bi = from;
        for i in from..=to {
            if fx[i].is_finite() {
                let v = affine(xs[i], y, fx[i]);
                if v > bv {
                    bv = v;
                    bi = i;
                }
            }
        }
        out[j] = Conj1d { value: bv, argmax: bi };
    }
    out
}

fn lower_hull(xs: &[f64], fx: &[f64], fin: &[usize]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(fin.len());
    for &i in fin {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (xs[b] - xs[a]) * (fx[i] - fx[a]) - (fx[b] - fx[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Brute-force O(N·M) conjugate with smallest-index tie-breaking.
pub fn legendre_1d_brute(xs: &[f64], fx: &[f64], slopes: &[f64]) -> Vec<Conj1d> {
    slopes
        .iter()
        .map(|&y| {
            let mut best = Conj1d { value: f64::NEG_INFINITY, argmax: 0 };
            for i in 0..xs.len() {
                if fx[i].is_finite() {
                    let v = affine(xs[i], y, fx[i]);
                    if v > best.value {
                        best = Conj1d { value: v, argmax: i };
                    }
                }
            }
            best
        })
        .collect()
}

/// Slope box from the extreme finite differences of `f`, widened by 10% of its width.
pub fn default_dual_box(f: &ExtGridFn) -> Vec<[f64; 2]> {
    let g = f.grid();
    let strides = g.strides();
    let mut idx = vec![0; g.dim()];
    (0..g.dim())
        .map(|d| {
            let h = g.step(d);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            if h > 0.0 {
                for &i in f.domain() {
                    g.unravel(i, &mut idx);
                    if idx[d] + 1 < g.res[d] {
                        let w = f.values()[i + strides[d]];
                        if w.is_finite() {
                            let s = (w - f.values()[i]) / h;
                            lo = lo.min(s);
                            hi = hi.max(s);
                        }
                    }
                }
            }
            if !lo.is_finite() {
                return [-1.0, 1.0];
            }
            // nearly equal extreme slopes (affine data) get the fallback width
            let pad = if hi - lo > 1e-9 * (1.0 + hi.abs()) { 0.1 * (hi - lo) } else { 0.1 * (1.0 + hi.abs()) };
            [lo - pad, hi + pad]
        })
        .collect()
}

/// Factored n-D conjugate. Axes are eliminated from the last to the first, so the value
/// at a dual node equals the nested maximum of x₀y₀ + (x₁y₁ + (… − f)), which is exactly
/// what the row-major brute-force loop computes with that association.
pub fn legendre_nd(f: &ExtGridFn, dual_box: &[[f64; 2]], dual_res: &[usize]) -> Result<ConjugateResult> {
    let g = f.grid();
    let n = g.dim();
    if dual_box.len() != n || dual_res.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dual_box.len().min(dual_res.len()) });
    }
    if f.domain().is_empty() {
        return Err(Error::InvalidArgument("f is +inf everywhere; the conjugate is not proper".into()));
    }
    let dual = GridSpec::new(
        dual_box.iter().map(|b| b[0]).collect(),
        dual_box.iter().map(|b| b[1]).collect(),
        dual_res.to_vec(),
    )?;
    // stage k lives on the mixed grid (x₀..x_{k-1}, y_k..y_{n-1}); stages[n] = -f
    let mut shapes: Vec<Vec<usize>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        shapes.push((0..n).map(|d| if d < k { g.res[d] } else { dual.res[d] }).collect());
    }
    let mut stages: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    stages[n] = f.values().iter().map(|v| -v).collect();
    for k in (0..n).rev() {
        let src_shape = &shapes[k + 1];
        let dst_shape = &shapes[k];
        let xs: Vec<f64> = (0..g.res[k]).map(|i| g.coord(k, i)).collect();
        let ys: Vec<f64> = (0..dual.res[k]).map(|j| dual.coord(k, j)).collect();
        let outer: usize = src_shape[..k].iter().product();
        let inner: usize = src_shape[k + 1..].iter().product();
        let src = &stages[k + 1];
        let lines: Vec<Vec<f64>> = (0..outer * inner)
            .into_par_iter()
            .map(|l| {
                let (o, i) = (l / inner, l % inner);
                let samples: Vec<f64> = (0..xs.len()).map(|a| -src[(o * xs.len() + a) * inner + i]).collect();
                legendre_1d_raw(&xs, &samples, &ys).into_iter().map(|c| c.value).collect()
            })
            .collect();
        let mut dst = vec![0.0; dst_shape.iter().product()];
        for (l, line) in lines.into_iter().enumerate() {
            let (o, i) = (l / inner, l % inner);
            for (b, v) in line.into_iter().enumerate() {
                dst[(o * ys.len() + b) * inner + i] = v;
            }
        }
        stages[k] = dst;
    }
    let values = stages[0].clone();
    if values.iter().any(|v| *v == f64::NEG_INFINITY || v.is_nan()) {
        return Err(Error::InvalidArgument("conjugate is not proper on this grid".into()));
    }
    let argmax: Vec<usize> = (0..dual.len())
        .into_par_iter()
        .map(|j| recover_argmax(f, &dual, &stages, &shapes, j))
        .collect();
    Ok(ConjugateResult { values: ExtGridFn::new(dual, values)?, argmax, dual_box: dual_box.to_vec() })
}

/// Smallest row-major primal index whose nested sum equals the dual value.
fn recover_argmax(f: &ExtGridFn, dual: &GridSpec, stages: &[Vec<f64>], shapes: &[Vec<usize>], j: usize) -> usize {
    let g = f.grid();
    let n = g.dim();
    let mut yidx = vec![0; n];
    dual.unravel(j, &mut yidx);
    let y: Vec<f64> = (0..n).map(|d| dual.coord(d, yidx[d])).collect();
    let target = stages[0][j];
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        let mut found = None;
        for a in 0..g.res[k] {
            // nested value with prefix chosen[..k], candidate a, best completion from stage k+1
            let mut idx: Vec<usize> = Vec::with_capacity(n);
            idx.extend_from_slice(&chosen);
            idx.push(a);
            idx.extend_from_slice(&yidx[k + 1..]);
            let flat = idx.iter().zip(&shapes[k + 1]).fold(0, |acc, (&i, &r)| acc * r + i);
            let mut v = g.coord(k, a) * y[k] + stages[k + 1][flat];
            for d in (0..k).rev() {
                v = g.coord(d, chosen[d]) * y[d] + v;
            }
            if v == target {
                found = Some(a);
                break;
            }
        }
        chosen.push(found.expect("argmax must exist for a finite conjugate value"));
    }
    g.ravel(&chosen)
}

/// Brute-force n-D conjugate with the nested association and smallest-index ties.
pub fn legendre_nd_brute(f: &ExtGridFn, dual: &GridSpec) -> (Vec<f64>, Vec<usize>) {
    let g = f.grid();
    let n = g.dim();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut vals = Vec::with_capacity(dual.len());
    let mut args = Vec::with_capacity(dual.len());
    for j in 0..dual.len() {
        dual.point(j, &mut y);
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for i in 0..g.len() {
            let fv = f.values()[i];
            if !fv.is_finite() {
                continue;
            }
            g.point(i, &mut x);
            let mut v = x[n - 1] * y[n - 1] - fv;
            for d in (0..n - 1).rev() {
                v = x[d] * y[d] + v;
            }
            if v > best {
                best = v;
                arg = i;
            }
        }
        vals.push(best);
        args.push(arg);
    }
    (vals, args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + i as f64 * (hi - lo) / (n - 1) as f64).collect()
    }

    #[test]
    fn quadratic_is_self_dual() {
        let xs = grid1(-2.0, 2.0, 81);
        let fx: Vec<f64> = xs.iter().map(|x| x * x / 2.0).collect();
        let ys = grid1(-1.0, 1.0, 41);
        let c = legendre_1d(&xs, &fx, &ys).unwrap();
        let dx = 0.05;
        for (y, r) in ys.iter().zip(&c) {
            assert!((r.value - y * y / 2.0).abs() <= dx * dx / 2.0);
        }
    }

    #[test]
    fn abs_on_bounded_grid() {
        let xs = grid1(-2.0, 2.0, 41);
        let fx: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let c = legendre_1d(&xs, &fx, &[0.5, 1.5, -1.5]).unwrap();
        assert_eq!(c[0].value, 0.0);
        assert_eq!(c[0].argmax, 20);
        assert!((c[1].value - 1.0).abs() < 1e-15);
        assert_eq!(c[1].argmax, 40);
        assert!((c[2].value - 1.0).abs() < 1e-15);
        assert_eq!(c, legendre_1d_brute(&xs, &fx, &[0.5, 1.5, -1.5]));
    }

    #[test]
    fn linear_ties_pick_smallest_index() {
        let xs = grid1(0.0, 1.0, 11);
        let c = legendre_1d(&xs, &xs, &[1.0]).unwrap();
        assert_eq!(c[0], Conj1d { value: 0.0, argmax: 0 });
    }

    #[test]
    fn rejects_improper() {
        assert!(legendre_1d(&[0.0, 1.0], &[f64::INFINITY; 2], &[0.0]).is_err());
        assert!(legendre_1d(&[1.0, 0.0], &[0.0, 0.0], &[0.0]).is_err());
    }

    #[test]
    fn point_indicator_has_zero_conjugate() {
        let g = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        let f = ExtGridFn::from_fn(g, |x| if x[0] == 0.0 && x[1] == 0.0 { 0.0 } else { f64::INFINITY }).unwrap();
        let c = legendre_nd(&f, &[[-3.0, 3.0], [-2.0, 2.0]], &[7, 9]).unwrap();
        assert!(c.values.values().iter().all(|v| *v == 0.0));
        assert!(c.argmax.iter().all(|&a| a == 12));
    }

    #[test]
    fn nd_quadratic() {
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let f = ExtGridFn::from_fn(g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let c = legendre_nd(&f, &[[-1.0, 1.0], [-1.0, 1.0]], &[21, 21]).unwrap();
        let dg = c.values.grid().clone();
        for j in 0..dg.len() {
            let y = dg.point_vec(j);
            assert!((c.values.values()[j] - 0.5 * (y[0] * y[0] + y[1] * y[1])).abs() < 0.01);
        }
        let (bv, ba) = legendre_nd_brute(&f, &dg);
        assert_eq!(bv, c.values.values());
        assert_eq!(ba, c.argmax);
    }
}
