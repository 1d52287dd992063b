//! Extended-real grid functions and epigraph geometry.

mod domain;
mod io;

pub use domain::{ConeCheck, ConeWitness, DomainSpec, EpigraphDomain, PhiKind};
pub use io::{read_grid, write_grid, GridHeader};

use crate::error::{check_dim, Error, Result};
use serde::{Deserialize, Serialize};

/// Fractional grid indices this close to an integer are treated as on-node.
pub const SNAP: f64 = 1e-9;

/// A real number or `+∞`, never NaN and never `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtValue(f64);

impl ExtValue {
    pub const INF: ExtValue = ExtValue(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(format!("{v} is not an extended value")));
        }
        Ok(ExtValue(v))
    }

    /// Sample of one of the nonnegative functions g, W, H, f.
    pub fn nonneg(v: f64) -> Result<Self> {
        let e = Self::new(v)?;
        if v < 0.0 {
            return Err(Error::InvalidArgument(format!("negative sample {v}")));
        }
        Ok(e)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }
}

impl std::ops::Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: Self) -> Self {
        // inf + finite = inf and inf + inf = inf, so plain float addition is right
        ExtValue(self.0 + rhs.0)
    }
}

/// Axis-aligned uniform tensor grid. Node `i` on axis `d` sits at `lo[d] + i * step(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub res: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, res: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != res.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("grid bounds and resolution must share a nonzero length".into()));
        }
        for d in 0..lo.len() {
            if !(lo[d].is_finite() && hi[d].is_finite()) || res[d] == 0 {
                return Err(Error::InvalidArgument(format!("bad grid axis {d}")));
            }
            if res[d] == 1 && lo[d] != hi[d] || res[d] > 1 && hi[d] <= lo[d] {
                return Err(Error::InvalidArgument(format!("bad extent on axis {d}")));
            }
        }
        Ok(GridSpec { lo, hi, res })
    }

    pub fn cube(n: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n], vec![res; n])
    }

    pub fn dim(&self) -> usize {
        self.res.len()
    }

    pub fn len(&self) -> usize {
        self.res.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, d: usize) -> f64 {
        if self.res[d] > 1 {
            (self.hi[d] - self.lo[d]) / (self.res[d] - 1) as f64
        } else {
            0.0
        }
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.dim()).map(|d| self.step(d)).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.steps().into_iter().fold(0.0, f64::max)
    }

    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut s = vec![1; n];
        for d in (0..n.saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.res[d + 1];
        }
        s
    }

    pub fn coord(&self, d: usize, i: usize) -> f64 {
        self.lo[d] + i as f64 * self.step(d)
    }

    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for d in (0..self.dim()).rev() {
            idx[d] = flat % self.res[d];
            flat /= self.res[d];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.res).fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn point(&self, flat: usize, x: &mut [f64]) {
        let mut rem = flat;
        for d in (0..self.dim()).rev() {
            let i = rem % self.res[d];
            rem /= self.res[d];
            x[d] = self.coord(d, i);
        }
    }

    pub fn point_vec(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point(flat, &mut x);
        x
    }

    /// Fractional index of coordinate `c` on axis `d`, snapped to an integer when within [`SNAP`].
    pub fn frac_index(&self, d: usize, c: f64) -> f64 {
        let step = self.step(d);
        let t = if step > 0.0 { (c - self.lo[d]) / step } else { (c - self.lo[d]) * f64::INFINITY };
        let r = t.round();
        if (t - r).abs() <= SNAP || (step == 0.0 && c == self.lo[d]) {
            if step == 0.0 { 0.0 } else { r }
        } else {
            t
        }
    }

    /// Same spacing and node lattice offset on every axis (up to a relative 1e-12).
    pub fn same_spacing(&self, other: &GridSpec) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        for d in 0..self.dim() {
            let (a, b) = (self.step(d), other.step(d));
            let tol = 1e-12 * a.abs().max(b.abs()).max(1e-300);
            // a single-node axis adopts the other grid's spacing
            if self.res[d] > 1 && other.res[d] > 1 && (a - b).abs() > tol {
                return Err(Error::SpacingMismatch { axis: d, left: a, right: b });
            }
        }
        Ok(())
    }

    /// Keep every `k`-th node; requires `(res - 1) % k == 0` on all axes.
    pub fn subsampled(&self, k: usize) -> Result<GridSpec> {
        let mut res = self.res.clone();
        for r in &mut res {
            if (*r - 1) % k != 0 {
                return Err(Error::InvalidArgument(format!("resolution {r} cannot be subsampled by {k}")));
            }
            *r = (*r - 1) / k + 1;
        }
        GridSpec::new(self.lo.clone(), self.hi.clone(), res)
    }
}

/// Row-major samples of an extended-real function on a [`GridSpec`]; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtGridFn {
    grid: GridSpec,
    values: Vec<f64>,
    domain: Vec<usize>,
}

impl ExtGridFn {
    /// Values may be any real or `+∞`.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::InvalidSample { coords: grid.point_vec(i), reason: format!("value {v}") });
            }
        }
        let domain = values.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(i, _)| i).collect();
        Ok(ExtGridFn { grid, values, domain })
    }

    /// Samples of g, W, H or f: negative values are rejected.
    pub fn new_nonneg(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::InvalidSample { coords: grid.point_vec(i), reason: format!("negative value {v}") });
            }
        }
        Self::new(grid, values)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        use rayon::prelude::*;
        let n = grid.dim();
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map_init(|| vec![0.0; n], |x, i| {
                grid.point(i, x);
                f(x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> ExtValue {
        ExtValue(self.values[flat])
    }

    /// Flat indices of finite nodes, ascending.
    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn is_finite_at(&self, flat: usize) -> bool {
        self.values[flat].is_finite()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// `c * self` with `c > 0`; keeps `+∞`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite());
        let values = self.values.iter().map(|&v| if v.is_finite() { c * v } else { v }).collect();
        ExtGridFn { grid: self.grid.clone(), values, domain: self.domain.clone() }
    }

    pub fn subsampled(&self, k: usize) -> Result<Self> {
        let g = self.grid.subsampled(k)?;
        let n = g.dim();
        let mut idx = vec![0; n];
        let mut values = Vec::with_capacity(g.len());
        for flat in 0..g.len() {
            g.unravel(flat, &mut idx);
            for i in idx.iter_mut() {
                *i *= k;
            }
            values.push(self.values[self.grid.ravel(&idx)]);
        }
        Self::new(g, values)
    }

    /// Multilinear interpolation. Returns `+∞` outside the box or when any corner
    /// carrying nonzero weight is infinite.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut base = 0usize;
        let strides = self.grid.strides();
        let mut fr = [0.0f64; 8];
        let mut active = [0usize; 8];
        let mut n_active = 0usize;
        if n > 8 {
            return self.interpolate_slow(x);
        }
        for d in 0..n {
            let r = self.grid.res[d];
            let t = self.grid.frac_index(d, x[d]);
            if !(t >= 0.0 && t <= (r - 1) as f64) {
                return f64::INFINITY;
            }
            let mut i0 = t.floor() as usize;
            if i0 + 1 >= r {
                i0 = r - 1;
            }
            let f = t - i0 as f64;
            base += i0 * strides[d];
            if f > 0.0 {
                fr[n_active] = f;
                active[n_active] = strides[d];
                n_active += 1;
            }
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << n_active) {
            let mut w = 1.0;
            let mut off = base;
            for k in 0..n_active {
                if mask >> k & 1 == 1 {
                    w *= fr[k];
                    off += active[k];
                } else {
                    w *= 1.0 - fr[k];
                }
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[off];
            if !v.is_finite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    fn interpolate_slow(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let strides = self.grid.strides();
        let mut base = 0;
        let mut axes = Vec::new();
        for d in 0..n {
            let r = self.grid.res[d];
            let t = self.grid.frac_index(d, x[d]);
            if !(t >= 0.0 && t <= (r - 1) as f64) {
                return f64::INFINITY;
            }
            let i0 = (t.floor() as usize).min(r - 1);
            base += i0 * strides[d];
            let f = t - i0 as f64;
            if f > 0.0 {
                axes.push((f, strides[d]));
            }
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << axes.len()) {
            let mut w = 1.0;
            let mut off = base;
            for (k, &(f, s)) in axes.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    w *= f;
                    off += s;
                } else {
                    w *= 1.0 - f;
                }
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[off];
            if !v.is_finite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    /// Central differences at interior nodes, one-sided next to the box edge or an infinite neighbour.
    /// `None` when the node or both neighbours along some axis are infinite.
    pub fn fd_gradient(&self, flat: usize) -> Option<Vec<f64>> {
        let n = self.dim();
        let v0 = self.values[flat];
        if !v0.is_finite() {
            return None;
        }
        let strides = self.grid.strides();
        let mut idx = vec![0; n];
        self.grid.unravel(flat, &mut idx);
        let mut grad = vec![0.0; n];
        for d in 0..n {
            let h = self.grid.step(d);
            if self.grid.res[d] < 2 {
                continue;
            }
            let fwd = (idx[d] + 1 < self.grid.res[d]).then(|| self.values[flat + strides[d]]).filter(|v| v.is_finite());
            let bwd = (idx[d] > 0).then(|| self.values[flat - strides[d]]).filter(|v| v.is_finite());
            grad[d] = match (bwd, fwd) {
                (Some(b), Some(f)) => (f - b) / (2.0 * h),
                (None, Some(f)) => (f - v0) / h,
                (Some(b), None) => (v0 - b) / h,
                (None, None) => return None,
            };
        }
        Some(grad)
    }

    /// Grid convexity certificate: nonnegative second differences along every axis
    /// over consecutive finite triples, and every axis line has a contiguous finite set.
    pub fn is_grid_convex(&self, tol: f64) -> bool {
        let n = self.dim();
        let strides = self.grid.strides();
        let mut idx = vec![0; n];
        for d in 0..n {
            let r = self.grid.res[d];
            for flat in 0..self.grid.len() {
                self.grid.unravel(flat, &mut idx);
                if idx[d] != 0 {
                    continue;
                }
                let line: Vec<f64> = (0..r).map(|k| self.values[flat + k * strides[d]]).collect();
                let fin: Vec<usize> = (0..r).filter(|&k| line[k].is_finite()).collect();
                if let (Some(&a), Some(&b)) = (fin.first(), fin.last()) {
                    if b - a + 1 != fin.len() {
                        return false;
                    }
                    for k in a + 1..b {
                        let dd = line[k - 1] - 2.0 * line[k] + line[k + 1];
                        let scale = line[k - 1].abs() + line[k].abs() + line[k + 1].abs();
                        if dd < -tol * scale.max(1.0) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Iterated trapezoid rule over finite nodes. Along the last axis each maximal run of
/// finite nodes is integrated separately (isolated nodes carry no mass); outer axes use
/// the plain trapezoid rule on the resulting line integrals.
pub fn grid_integral(f: &ExtGridFn, integrand: impl Fn(f64) -> f64) -> f64 {
    let g = f.grid();
    let n = g.dim();
    let last = g.res[n - 1];
    let h_last = g.step(n - 1);
    let lines = g.len() / last;
    let mut line_int = vec![0.0; lines];
    for (l, out) in line_int.iter_mut().enumerate() {
        let row = &f.values()[l * last..(l + 1) * last];
        let mut acc = 0.0;
        let mut k = 0;
        while k < last {
            if !row[k].is_finite() {
                k += 1;
                continue;
            }
            let start = k;
            while k < last && row[k].is_finite() {
                k += 1;
            }
            if k - start >= 2 {
                let mut s = 0.5 * (integrand(row[start]) + integrand(row[k - 1]));
                for v in &row[start + 1..k - 1] {
                    s += integrand(*v);
                }
                acc += s * h_last;
            }
        }
        *out = acc;
    }
    let mut cur = line_int;
    for d in (0..n - 1).rev() {
        let r = g.res[d];
        let h = g.step(d);
        let inner = cur.len() / r;
        let outer = cur.len() / (r * inner);
        let mut next = vec![0.0; outer * inner];
        for o in 0..outer {
            for i in 0..inner {
                let mut s = 0.0;
                for k in 0..r {
                    let w = if k == 0 || k == r - 1 { 0.5 } else { 1.0 };
                    s += w * cur[(o * r + k) * inner + i];
                }
                next[o * inner + i] = if r > 1 { s * h } else { s };
            }
        }
        cur = next;
    }
    cur[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(res: usize) -> GridSpec {
        GridSpec::new(vec![0.0], vec![1.0], vec![res]).unwrap()
    }

    #[test]
    fn ext_value_rules() {
        assert!(ExtValue::new(f64::NAN).is_err());
        assert!(ExtValue::new(f64::NEG_INFINITY).is_err());
        assert!(ExtValue::nonneg(-1.0).is_err());
        let a = ExtValue::new(2.0).unwrap();
        assert_eq!((ExtValue::INF + a).get(), f64::INFINITY);
        assert_eq!(ExtValue::INF.min(a), a);
    }

    #[test]
    fn ravel_roundtrip() {
        let g = GridSpec::new(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 3.0], vec![3, 4, 5]).unwrap();
        let mut idx = vec![0; 3];
        for flat in 0..g.len() {
            g.unravel(flat, &mut idx);
            assert_eq!(g.ravel(&idx), flat);
        }
        assert_eq!(g.strides(), vec![20, 5, 1]);
    }

    #[test]
    fn domain_set_tracks_values() {
        let f = ExtGridFn::new(line(4), vec![1.0, f64::INFINITY, 0.5, f64::INFINITY]).unwrap();
        assert_eq!(f.domain(), &[0, 2]);
        assert!(ExtGridFn::new_nonneg(line(2), vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_bilinear_data() {
        let g = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        let f = ExtGridFn::from_fn(g, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]).unwrap();
        let v = f.interpolate(&[0.3, -0.7]);
        assert!((v - (1.0 + 0.6 + 0.7 - 0.105)).abs() < 1e-14);
        assert_eq!(f.interpolate(&[1.01, 0.0]), f64::INFINITY);
        assert_eq!(f.interpolate(&[1.0 + 1e-12, 1.0]), f.values()[24]);
    }

    #[test]
    fn interpolation_is_conservative_near_infinite_corners() {
        let f = ExtGridFn::new(line(3), vec![1.0, 2.0, f64::INFINITY]).unwrap();
        assert_eq!(f.interpolate(&[0.25]), 1.5);
        assert_eq!(f.interpolate(&[0.5]), 2.0);
        assert_eq!(f.interpolate(&[0.75]), f64::INFINITY);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly_on_runs() {
        let g = GridSpec::cube(2, 0.0, 1.0, 11).unwrap();
        let f = ExtGridFn::from_fn(g, |x| 1.0 + x[0] + x[1]).unwrap();
        assert!((grid_integral(&f, |v| v) - 2.0).abs() < 1e-13);
        let half = ExtGridFn::from_fn(GridSpec::cube(2, 0.0, 1.0, 11).unwrap(), |x| {
            if x[1] >= 0.5 - 1e-12 { 1.0 } else { f64::INFINITY }
        })
        .unwrap();
        assert!((grid_integral(&half, |v| v) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn subsample_keeps_even_nodes() {
        let f = ExtGridFn::from_fn(line(5), |x| x[0]).unwrap();
        let c = f.subsampled(2).unwrap();
        assert_eq!(c.values(), &[0.0, 0.5, 1.0]);
        assert!(f.subsampled(3).is_err());
    }

    #[test]
    fn convexity_certificate() {
        let f = ExtGridFn::from_fn(GridSpec::cube(2, -1.0, 1.0, 9).unwrap(), |x| x[0] * x[0] + (x[1] - 0.2).abs()).unwrap();
        assert!(f.is_grid_convex(1e-12));
        let g = ExtGridFn::from_fn(GridSpec::cube(1, -1.0, 1.0, 9).unwrap(), |x| (3.0 * x[0]).sin()).unwrap();
        assert!(!g.is_grid_convex(1e-12));
        let gap = ExtGridFn::new(line(4), vec![0.0, f64::INFINITY, 0.0, 1.0]).unwrap();
        assert!(!gap.is_grid_convex(1e-12));
    }
}
