//! Q_h^W(g)(x) = min over W-grid nodes y of g(x − h·y) + h·W(y).
//!
//! The fast path is a branch and bound over a kd-tree of y index boxes. Each tree node
//! carries min W over its box; the g term is bounded below by a min-pyramid query over
//! the cells that x − h·y can touch. Ties go to the smallest y index, as in the
//! exhaustive loop, so both paths return identical values and argmins.

use super::InfConvResult;
use crate::error::{Error, Result};
use crate::extgrid::{ExtGridFn, GridSpec};
use rayon::prelude::*;

const LEAF: usize = 8;

#[derive(Debug, Clone)]
struct KdNode {
    lo: Vec<usize>,
    hi: Vec<usize>, // inclusive
    min_w: f64,
    /// flat index of the lowest corner; no node in the box has a smaller index
    first: usize,
    children: Option<(usize, usize)>,
}

struct KdTree {
    nodes: Vec<KdNode>,
}

impl KdTree {
    fn build(w: &ExtGridFn) -> Self {
        let g = w.grid();
        let mut t = KdTree { nodes: Vec::new() };
        let lo = vec![0; g.dim()];
        let hi: Vec<usize> = g.res.iter().map(|r| r - 1).collect();
        t.build_rec(w, lo, hi);
        t
    }

    fn build_rec(&mut self, w: &ExtGridFn, lo: Vec<usize>, hi: Vec<usize>) -> usize {
        let g = w.grid();
        let count: usize = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).product();
        let id = self.nodes.len();
        self.nodes.push(KdNode { lo: lo.clone(), hi: hi.clone(), min_w: f64::INFINITY, first: g.ravel(&lo), children: None });
        if count <= LEAF {
            let mut m = f64::INFINITY;
            for_each_in_box(g, &lo, &hi, |flat| m = m.min(w.values()[flat]));
            self.nodes[id].min_w = m;
            return id;
        }
        let axis = (0..lo.len()).max_by_key(|&d| (hi[d] - lo[d], usize::MAX - d)).unwrap();
        let mid = (lo[axis] + hi[axis]) / 2;
        let mut hi_a = hi.clone();
        hi_a[axis] = mid;
        let mut lo_b = lo.clone();
        lo_b[axis] = mid + 1;
        let a = self.build_rec(w, lo, hi_a);
        let b = self.build_rec(w, lo_b, hi);
        let m = self.nodes[a].min_w.min(self.nodes[b].min_w);
        self.nodes[id].min_w = m;
        self.nodes[id].children = Some((a, b));
        id
    }
}

/// Visits the flat indices of an inclusive index box in ascending order.
fn for_each_in_box(g: &GridSpec, lo: &[usize], hi: &[usize], mut f: impl FnMut(usize)) {
    let n = lo.len();
    let mut idx = lo.to_vec();
    loop {
        f(g.ravel(&idx));
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if idx[d] < hi[d] {
                idx[d] += 1;
                break;
            }
            idx[d] = lo[d];
        }
    }
}

/// Level k stores the min over aligned blocks of 2^k nodes per axis.
struct MinPyramid {
    levels: Vec<(Vec<usize>, Vec<f64>)>,
}

impl MinPyramid {
    fn build(f: &ExtGridFn) -> Self {
        let mut levels = vec![(f.grid().res.clone(), f.values().to_vec())];
        loop {
            let (res, vals) = levels.last().unwrap();
            if res.iter().all(|&r| r == 1) {
                break;
            }
            let nres: Vec<usize> = res.iter().map(|&r| (r + 1) / 2).collect();
            let n = res.len();
            let total: usize = nres.iter().product();
            let mut out = vec![f64::INFINITY; total];
            let mut idx = vec![0; n];
            for (flat, &v) in vals.iter().enumerate() {
                let mut rem = flat;
                for d in (0..n).rev() {
                    idx[d] = rem % res[d] / 2;
                    rem /= res[d];
                }
                let t = idx.iter().zip(&nres).fold(0, |acc, (&i, &r)| acc * r + i);
                if v < out[t] {
                    out[t] = v;
                }
            }
            levels.push((nres, out));
        }
        MinPyramid { levels }
    }

    /// A lower bound for the min over the inclusive index box (the min over a covering set of blocks).
    fn query(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let n = lo.len();
        let mut k = 0;
        // coarsest level needed so the box spans at most two blocks per axis
        while (0..n).any(|d| (hi[d] >> k) - (lo[d] >> k) > 1) {
            k += 1;
        }
        let (res, vals) = &self.levels[k.min(self.levels.len() - 1)];
        let k = k.min(self.levels.len() - 1);
        let blo: Vec<usize> = lo.iter().map(|&i| i >> k).collect();
        let bhi: Vec<usize> = (0..n).map(|d| (hi[d] >> k).min(res[d] - 1)).collect();
        let mut m = f64::INFINITY;
        let mut idx = blo.clone();
        loop {
            let t = idx.iter().zip(res).fold(0, |acc, (&i, &r)| acc * r + i);
            m = m.min(vals[t]);
            let mut d = n;
            loop {
                if d == 0 {
                    return m;
                }
                d -= 1;
                if idx[d] < bhi[d] {
                    idx[d] += 1;
                    break;
                }
                idx[d] = blo[d];
            }
        }
    }
}

fn check_inputs(g: &ExtGridFn, w: &ExtGridFn, h: f64) -> Result<()> {
    crate::error::check_dim(g.dim(), w.dim())?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h must be finite and >= 0, got {h}")));
    }
    Ok(())
}

fn identity(g: &ExtGridFn, w: &ExtGridFn) -> Result<InfConvResult> {
    let y0 = w.domain().first().copied();
    let argmin = g.values().iter().map(|v| if v.is_finite() { y0 } else { None }).collect();
    Ok(InfConvResult { values: g.clone(), argmin, empty: false }.flag_empty())
}

#[inline]
fn candidate(g: &ExtGridFn, x: &[f64], y: &[f64], h: f64, hw: f64, buf: &mut [f64]) -> f64 {
    if !hw.is_finite() {
        return f64::INFINITY;
    }
    for d in 0..x.len() {
        buf[d] = x[d] - h * y[d];
    }
    let gv = g.interpolate(buf);
    if gv.is_finite() {
        gv + hw
    } else {
        f64::INFINITY
    }
}

/// Exhaustive reference: every y node in ascending flat order, strict improvements only.
pub fn hopflax_apply_exhaustive(g: &ExtGridFn, w: &ExtGridFn, h: f64) -> Result<InfConvResult> {
    check_inputs(g, w, h)?;
    if h == 0.0 {
        return identity(g, w);
    }
    let gg = g.grid();
    let wg = w.grid();
    let n = gg.dim();
    let ys: Vec<(usize, Vec<f64>, f64)> = w.domain().iter().map(|&j| (j, wg.point_vec(j), h * w.values()[j])).collect();
    let out: Vec<(f64, Option<usize>)> = (0..gg.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(x, buf), i| {
                gg.point(i, x);
                let mut best = f64::INFINITY;
                let mut arg = None;
                for (j, y, hw) in &ys {
                    let v = candidate(g, x, y, h, *hw, buf);
                    if v < best {
                        best = v;
                        arg = Some(*j);
                    }
                }
                (best, arg)
            },
        )
        .collect();
    finish(gg.clone(), out)
}

fn finish(grid: GridSpec, out: Vec<(f64, Option<usize>)>) -> Result<InfConvResult> {
    let (vals, argmin): (Vec<f64>, Vec<Option<usize>>) = out.into_iter().unzip();
    Ok(InfConvResult { values: ExtGridFn::new(grid, vals)?, argmin, empty: false }.flag_empty())
}

struct Ctx<'a> {
    g: &'a ExtGridFn,
    w: &'a ExtGridFn,
    h: f64,
    tree: KdTree,
    pyr: MinPyramid,
}

impl Ctx<'_> {
    /// Index box of g nodes that can carry weight at x − h·y for y in the tree node.
    fn g_range(&self, x: &[f64], node: &KdNode, lo: &mut [usize], hi: &mut [usize]) -> bool {
        let gg = self.g.grid();
        let wg = self.w.grid();
        for d in 0..x.len() {
            let ya = wg.coord(d, node.lo[d]);
            let yb = wg.coord(d, node.hi[d]);
            let pa = x[d] - self.h * yb;
            let pb = x[d] - self.h * ya;
            let step = gg.step(d);
            let r = gg.res[d] as f64;
            let (ta, tb) = if step > 0.0 {
                ((pa - gg.lo[d]) / step, (pb - gg.lo[d]) / step)
            } else {
                (0.0, 0.0)
            };
            let ta = (ta - 2.0 * crate::extgrid::SNAP).floor() - 1.0;
            let tb = (tb + 2.0 * crate::extgrid::SNAP).ceil() + 1.0;
            if tb < 0.0 || ta > r - 1.0 {
                return false;
            }
            lo[d] = ta.max(0.0) as usize;
            hi[d] = (tb.min(r - 1.0)) as usize;
        }
        true
    }

    fn solve(&self, x: &[f64], warm: Option<usize>, buf: &mut [f64], ybuf: &mut [f64], stack: &mut Vec<usize>) -> (f64, Option<usize>) {
        let n = x.len();
        let wg = self.w.grid();
        let wv = self.w.values();
        let mut best = f64::INFINITY;
        let mut arg: Option<usize> = None;
        if let Some(j) = warm {
            wg.point(j, ybuf);
            let v = candidate(self.g, x, ybuf, self.h, self.h * wv[j], buf);
            if v < best {
                best = v;
                arg = Some(j);
            }
        }
        let mut lo = vec![0; n];
        let mut hi = vec![0; n];
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.tree.nodes[id];
            if !node.min_w.is_finite() {
                continue;
            }
            if !self.g_range(x, node, &mut lo, &mut hi) {
                continue;
            }
            let gmin = self.pyr.query(&lo, &hi);
            let lb = gmin + self.h * node.min_w;
            if !lb.is_finite() {
                continue;
            }
            let relaxed = lb - 1e-12 * lb.abs();
            if relaxed > best || (relaxed >= best && arg.map_or(false, |a| node.first > a)) {
                continue;
            }
            match node.children {
                Some((a, b)) => {
                    // visit the child with the smaller W bound first
                    if self.tree.nodes[a].min_w <= self.tree.nodes[b].min_w {
                        stack.push(b);
                        stack.push(a);
                    } else {
                        stack.push(a);
                        stack.push(b);
                    }
                }
                None => {
                    for_each_in_box(wg, &node.lo, &node.hi, |j| {
                        let hw = self.h * wv[j];
                        if !hw.is_finite() {
                            return;
                        }
                        wg.point(j, ybuf);
                        let v = candidate(self.g, x, ybuf, self.h, hw, buf);
                        if v < best || (v == best && v.is_finite() && arg.map_or(true, |a| j < a)) {
                            best = v;
                            arg = Some(j);
                        }
                    });
                }
            }
        }
        if best.is_finite() {
            (best, arg)
        } else {
            (f64::INFINITY, None)
        }
    }
}

/// Hopf–Lax operator on the grid of `g`, with `w` sampled on its own y-grid. Off-grid
/// values of g come from multilinear interpolation; cells with an infinite corner count
/// as outside. `h = 0` returns g.
pub fn hopflax_apply(g: &ExtGridFn, w: &ExtGridFn, h: f64) -> Result<InfConvResult> {
    hopflax_apply_on(g, w, h, g.grid())
}

/// As [`hopflax_apply`], evaluated at the nodes of `out` (for instance the grid of g
/// moved by h·e, whose nodes line up with Ω_h).
pub fn hopflax_apply_on(g: &ExtGridFn, w: &ExtGridFn, h: f64, out_grid: &GridSpec) -> Result<InfConvResult> {
    check_inputs(g, w, h)?;
    crate::error::check_dim(g.dim(), out_grid.dim())?;
    if h == 0.0 && out_grid == g.grid() {
        return identity(g, w);
    }
    let n = out_grid.dim();
    if h == 0.0 {
        let y0 = w.domain().first().copied();
        let out: Vec<(f64, Option<usize>)> = (0..out_grid.len())
            .map(|i| {
                let v = g.interpolate(&out_grid.point_vec(i));
                (v, if v.is_finite() { y0 } else { None })
            })
            .collect();
        return finish(out_grid.clone(), out);
    }
    let ctx = Ctx { g, w, h, tree: KdTree::build(w), pyr: MinPyramid::build(g) };
    let row = out_grid.res[n - 1];
    let mut out = vec![(f64::INFINITY, None); out_grid.len()];
    out.par_chunks_mut(row).enumerate().for_each(|(r, chunk)| {
        let mut x = vec![0.0; n];
        let mut buf = vec![0.0; n];
        let mut ybuf = vec![0.0; n];
        let mut stack = Vec::new();
        let mut warm = None;
        for (k, slot) in chunk.iter_mut().enumerate() {
            out_grid.point(r * row + k, &mut x);
            let res = ctx.solve(&x, warm, &mut buf, &mut ybuf, &mut stack);
            if res.1.is_some() {
                warm = res.1;
            }
            *slot = res;
        }
    });
    finish(out_grid.clone(), out)
}

/// Pointwise Q_h for an analytic g: min over W nodes of g(x − h·y) + h·W(y). Exhaustive.
pub fn hopflax_point(g: &(impl crate::field::Field + ?Sized), w: &ExtGridFn, h: f64, x: &[f64]) -> (f64, Option<usize>) {
    if h == 0.0 {
        return (g.value(x), None);
    }
    let wg = w.grid();
    let mut y = vec![0.0; x.len()];
    let mut p = vec![0.0; x.len()];
    let mut best = f64::INFINITY;
    let mut arg = None;
    for &j in w.domain() {
        wg.point(j, &mut y);
        for d in 0..x.len() {
            p[d] = x[d] - h * y[d];
        }
        let v = g.value(&p) + h * w.values()[j];
        if v < best {
            best = v;
            arg = Some(j);
        }
    }
    (best, arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pyramid_bounds_box_min() {
        let grid = GridSpec::cube(2, 0.0, 1.0, 13).unwrap();
        let f = ExtGridFn::from_fn(grid, |x| (x[0] * 7.3).sin() + (x[1] * 5.1).cos() + 3.0).unwrap();
        let p = MinPyramid::build(&f);
        for (lo, hi) in [([0, 0], [12, 12]), ([3, 5], [4, 11]), ([7, 7], [7, 7])] {
            let mut m = f64::INFINITY;
            for_each_in_box(f.grid(), &lo, &hi, |j| m = m.min(f.values()[j]));
            let q = p.query(&lo, &hi);
            assert!(q <= m);
        }
        assert_eq!(p.query(&[7, 7], &[7, 7]), f.values()[f.grid().ravel(&[7, 7])]);
    }

    #[test]
    fn branch_and_bound_matches_loop() {
        let gg = GridSpec::cube(2, -1.0, 1.0, 17).unwrap();
        let wg = GridSpec::cube(2, -1.5, 1.5, 13).unwrap();
        let g = ExtGridFn::from_fn(gg, |x| if x[1] >= x[0].abs() * 0.5 { 1.0 + x[0] * x[0] + 0.3 * x[1] } else { f64::INFINITY }).unwrap();
        let w = ExtGridFn::from_fn(wg, |y| 0.5 * (y[0] * y[0] + y[1] * y[1])).unwrap();
        for h in [0.1, 0.5, 1.7] {
            let a = hopflax_apply(&g, &w, h).unwrap();
            let b = hopflax_apply_exhaustive(&g, &w, h).unwrap();
            assert_eq!(a.values.values(), b.values.values());
            assert_eq!(a.argmin, b.argmin);
        }
    }

    #[test]
    fn zero_h_is_identity() {
        let gg = GridSpec::cube(1, 0.0, 1.0, 5).unwrap();
        let g = ExtGridFn::from_fn(gg.clone(), |x| x[0]).unwrap();
        let r = hopflax_apply(&g, &g, 0.0).unwrap();
        assert_eq!(r.values, g);
    }
}
