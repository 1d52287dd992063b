//! Discrete min-plus convolution (f□g)[k] = min_i f[i] + g[k − i].

use super::InfConvResult;
use crate::error::{Error, Result};
use crate::extgrid::{ExtGridFn, GridSpec};

fn sum_grid(f: &ExtGridFn, g: &ExtGridFn) -> Result<GridSpec> {
    let (a, b) = (f.grid(), g.grid());
    a.same_spacing(b)?;
    let n = a.dim();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut res = Vec::with_capacity(n);
    for d in 0..n {
        let step = if a.res[d] > 1 { a.step(d) } else { b.step(d) };
        let r = a.res[d] + b.res[d] - 1;
        let l = a.lo[d] + b.lo[d];
        lo.push(l);
        hi.push(if r > 1 { l + (r - 1) as f64 * step } else { l });
        res.push(r);
    }
    GridSpec::new(lo, hi, res)
}

/// Reference: exhaustive double loop. Pairs are visited with the f index ascending and
/// only strict improvements are kept, so ties resolve to the smallest f index.
pub fn infconv_reference(f: &ExtGridFn, g: &ExtGridFn) -> Result<InfConvResult> {
    let out = sum_grid(f, g)?;
    let n = out.dim();
    let (fg, gg) = (f.grid(), g.grid());
    let mut vals = vec![f64::INFINITY; out.len()];
    let mut arg: Vec<Option<usize>> = vec![None; out.len()];
    let mut fi = vec![0; n];
    let mut gi = vec![0; n];
    let mut k = vec![0; n];
    let gdom: Vec<(usize, Vec<usize>)> = g
        .domain()
        .iter()
        .map(|&j| {
            gg.unravel(j, &mut gi);
            (j, gi.clone())
        })
        .collect();
    for &i in f.domain() {
        fg.unravel(i, &mut fi);
        let fv = f.values()[i];
        for (j, gidx) in &gdom {
            for d in 0..n {
                k[d] = fi[d] + gidx[d];
            }
            let flat = out.ravel(&k);
            let v = fv + g.values()[*j];
            if v < vals[flat] {
                vals[flat] = v;
                arg[flat] = Some(i);
            }
        }
    }
    Ok(InfConvResult { values: ExtGridFn::new(out, vals)?, argmin: arg, empty: false }.flag_empty())
}

/// Dispatches to the monotone-argmin path for 1-D inputs with a grid-convex g,
/// otherwise to the reference loop.
pub fn infconv(f: &ExtGridFn, g: &ExtGridFn) -> Result<InfConvResult> {
    if f.dim() == 1 && g.is_grid_convex(0.0) && !g.domain().is_empty() {
        infconv_monotone_1d(f, g)
    } else {
        infconv_reference(f, g)
    }
}

/// Divide and conquer over rows k of M[k][i] = f[i] + g[k−i]. With g convex the matrix is
/// Monge on its staircase of finite entries, so leftmost row minima move right with k.
pub fn infconv_monotone_1d(f: &ExtGridFn, g: &ExtGridFn) -> Result<InfConvResult> {
    if f.dim() != 1 || g.dim() != 1 {
        return Err(Error::InvalidArgument("monotone path is one-dimensional".into()));
    }
    if !g.is_grid_convex(0.0) {
        return Err(Error::InvalidArgument("monotone path requires a grid-convex g".into()));
    }
    let out = sum_grid(f, g)?;
    let rows = out.len();
    let cols: Vec<usize> = f.domain().to_vec();
    let mut vals = vec![f64::INFINITY; rows];
    let mut arg: Vec<Option<usize>> = vec![None; rows];
    if cols.is_empty() || g.domain().is_empty() {
        return Ok(InfConvResult { values: ExtGridFn::new(out, vals)?, argmin: arg, empty: true });
    }
    let (gl, gh) = (g.domain()[0], *g.domain().last().unwrap());
    let fv = f.values();
    let gv = g.values();
    // compressed-column window of finite entries in row k
    let window = |k: usize| -> (usize, usize) {
        let lo_i = k.saturating_sub(gh);
        let lb = cols.partition_point(|&c| c < lo_i);
        let ub = if k < gl { 0 } else { cols.partition_point(|&c| c <= k - gl) };
        (lb, ub) // half-open [lb, ub)
    };
    let mut stack = vec![(0usize, rows, 0usize, cols.len() - 1)];
    while let Some((r0, r1, c0, c1)) = stack.pop() {
        if r0 >= r1 {
            continue;
        }
        let mid = (r0 + r1) / 2;
        let (lb, ub) = window(mid);
        let a = lb.max(c0);
        let b = ub.min(c1 + 1);
        let opt;
        if a < b {
            let mut best = f64::INFINITY;
            let mut bi = a;
            for c in a..b {
                let i = cols[c];
                let v = fv[i] + gv[mid - i];
                if v < best {
                    best = v;
                    bi = c;
                }
            }
            if best.is_finite() {
                vals[mid] = best;
                arg[mid] = Some(cols[bi]);
            }
            opt = bi;
        } else {
            opt = lb.clamp(c0, c1);
        }
        stack.push((r0, mid, c0, opt));
        stack.push((mid + 1, r1, opt, c1));
    }
    Ok(InfConvResult { values: ExtGridFn::new(out, vals)?, argmin: arg, empty: false }.flag_empty())
}
