//! Infimal convolution, the Hopf–Lax operator and the checks built on them.

mod apply;
mod counterexample;
mod infconv;
mod pointwise;

pub use apply::{hopflax_apply, hopflax_apply_exhaustive, hopflax_apply_on, hopflax_point};
pub use counterexample::{counterexample_expected, counterexample_pair, CounterexampleVariant};
pub use infconv::{infconv, infconv_monotone_1d, infconv_reference};
pub use pointwise::hopflax_pointwise;

use crate::error::{Error, Result};
use crate::extgrid::{EpigraphDomain, ExtGridFn};
use crate::field::{gradient_or_fd, Field};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct InfConvResult {
    pub values: ExtGridFn,
    /// Flat index of a minimiser (an f index for `infconv`, a y index for Hopf–Lax).
    pub argmin: Vec<Option<usize>>,
    /// Set when no node is finite.
    pub empty: bool,
}

impl InfConvResult {
    pub(crate) fn flag_empty(mut self) -> Self {
        self.empty = self.values.domain().is_empty();
        self
    }
}

/// max over nodes finite on either side of |Q_h(g) − Q_{h−s}(Q_s(g))|. A node finite on
/// one side only counts as +∞.
pub fn semigroup_residual(g: &ExtGridFn, w: &ExtGridFn, h: f64, s: f64) -> Result<f64> {
    if !(0.0..=h).contains(&s) {
        return Err(Error::InvalidArgument(format!("need 0 <= s <= h, got s={s}, h={h}")));
    }
    let direct = hopflax_apply(g, w, h)?;
    let inner = hopflax_apply(g, w, s)?;
    let split = hopflax_apply(&inner.values, w, h - s)?;
    Ok(max_abs_diff(&direct.values, &split.values))
}

pub(crate) fn max_abs_diff(a: &ExtGridFn, b: &ExtGridFn) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| match (x.is_finite(), y.is_finite()) {
            (true, true) => (x - y).abs(),
            (false, false) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct HjQuotient {
    pub h: Vec<f64>,
    /// (Q_h(g)(x) − g(x))/h per h.
    pub quotients: Vec<f64>,
    /// −W*(∇g(x)) with the discrete conjugate over the W nodes.
    pub reference: f64,
    /// Polynomial extrapolation of the quotients to h = 0.
    pub extrapolated: f64,
    pub deviation: f64,
    pub gradient: Vec<f64>,
    /// min over boundary nodes of (W(y) − min W)/‖y − y_min‖ and max ‖∇g‖ seen.
    pub boundary_slope: f64,
    pub max_grad: f64,
}

/// Neville's scheme evaluated at 0.
pub fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let m = p.len();
    for k in 1..m {
        for i in 0..m - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

/// Discrete sup_y {y·z − W(y)} over finite W nodes.
pub fn grid_conjugate_at(w: &ExtGridFn, z: &[f64]) -> f64 {
    let wg = w.grid();
    let mut y = vec![0.0; z.len()];
    let mut best = f64::NEG_INFINITY;
    for &j in w.domain() {
        wg.point(j, &mut y);
        let v = y.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() - w.values()[j];
        best = best.max(v);
    }
    best
}

fn boundary_slope(w: &ExtGridFn) -> f64 {
    let wg = w.grid();
    let n = wg.dim();
    let Some(&j0) = w.domain().iter().min_by(|a, b| w.values()[**a].total_cmp(&w.values()[**b])) else {
        return 0.0;
    };
    let y0 = wg.point_vec(j0);
    let w0 = w.values()[j0];
    let mut idx = vec![0; n];
    let mut y = vec![0.0; n];
    let mut slope = f64::INFINITY;
    for flat in 0..wg.len() {
        wg.unravel(flat, &mut idx);
        // a node is on the boundary of the finite set if it touches the box edge or an infinite neighbour
        let v = w.values()[flat];
        if !v.is_finite() {
            continue;
        }
        let strides = wg.strides();
        let edge = (0..n).any(|d| {
            idx[d] == 0
                || idx[d] + 1 == wg.res[d]
                || !w.values()[flat - strides[d]].is_finite()
                || !w.values()[flat + strides[d]].is_finite()
        });
        if !edge {
            continue;
        }
        wg.point(flat, &mut y);
        let r = y.iter().zip(&y0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if r > 0.0 {
            slope = slope.min((v - w0) / r);
        }
    }
    slope
}

/// Difference quotients of h ↦ Q_h^W(g)(x) at h = 0 against −W*(∇g(x)).
///
/// `h_list` must be strictly decreasing. With a domain, x must lie strictly inside it.
/// The W grid must grow faster at its edge than any gradient of g met along the way.
pub fn hj_difference_quotient(
    g: &(impl Field + ?Sized),
    w: &ExtGridFn,
    h_list: &[f64],
    x: &[f64],
    domain: Option<&EpigraphDomain>,
) -> Result<HjQuotient> {
    crate::error::check_dim(g.dim(), x.len())?;
    crate::error::check_dim(w.dim(), x.len())?;
    if h_list.is_empty() || h_list.iter().any(|h| !(*h > 0.0)) || h_list.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidArgument("h_list must be strictly decreasing positives".into()));
    }
    let scale = 1e-6 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
    if let Some(dom) = domain {
        crate::error::check_dim(dom.dim(), x.len())?;
        let n = x.len();
        if x[n - 1] <= dom.phi(&x[..n - 1]) + scale {
            return Err(Error::DomainRejected("x lies on the boundary of the domain".into()));
        }
    }
    let mut probe = x.to_vec();
    for d in 0..x.len() {
        for s in [-scale, scale] {
            probe[d] = x[d] + s;
            if !g.value(&probe).is_finite() {
                return Err(Error::DomainRejected("x is not interior to dom g".into()));
            }
        }
        probe[d] = x[d];
    }
    let gx = g.value(x);
    let grad = gradient_or_fd(g, x);
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut max_grad = norm(&grad);
    let mut quotients = Vec::with_capacity(h_list.len());
    let wg = w.grid();
    for &h in h_list {
        let (q, arg) = hopflax_point(g, w, h, x);
        if let Some(j) = arg {
            let y = wg.point_vec(j);
            let p: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - h * b).collect();
            max_grad = max_grad.max(norm(&gradient_or_fd(g, &p)));
        }
        quotients.push((q - gx) / h);
    }
    let slope = boundary_slope(w);
    if !(slope > max_grad) {
        return Err(Error::Hypothesis(format!(
            "W grid too small: boundary slope {slope} does not exceed max |grad g| = {max_grad}"
        )));
    }
    let reference = -grid_conjugate_at(w, &grad);
    let extrapolated = extrapolate_to_zero(h_list, &quotients);
    Ok(HjQuotient {
        h: h_list.to_vec(),
        quotients,
        reference,
        extrapolated,
        deviation: (extrapolated - reference).abs(),
        gradient: grad,
        boundary_slope: slope,
        max_grad,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSumReport {
    pub equal: bool,
    pub result_count: usize,
    pub minkowski_count: usize,
    /// Output multi-index found in one set but not the other.
    pub witness: Option<Vec<usize>>,
}

/// Compares the finite set of f□g with the index sum of the finite sets of f and g.
pub fn domain_sum_check(f: &ExtGridFn, g: &ExtGridFn) -> Result<DomainSumReport> {
    let r = infconv(f, g)?;
    let out = r.values.grid().clone();
    let n = out.dim();
    let mut mink = vec![false; out.len()];
    let (mut a, mut b, mut k) = (vec![0; n], vec![0; n], vec![0; n]);
    for &i in f.domain() {
        f.grid().unravel(i, &mut a);
        for &j in g.domain() {
            g.grid().unravel(j, &mut b);
            for d in 0..n {
                k[d] = a[d] + b[d];
            }
            mink[out.ravel(&k)] = true;
        }
    }
    let mut witness = None;
    for (flat, &m) in mink.iter().enumerate() {
        if m != r.values.is_finite_at(flat) {
            let mut idx = vec![0; n];
            out.unravel(flat, &mut idx);
            witness = Some(idx);
            break;
        }
    }
    Ok(DomainSumReport {
        equal: witness.is_none(),
        result_count: r.values.domain().len(),
        minkowski_count: mink.iter().filter(|m| **m).count(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extgrid::GridSpec;

    #[test]
    fn neville_recovers_polynomial() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let v: Vec<f64> = h.iter().map(|t| 1.5 - 2.0 * t + 0.7 * t * t).collect();
        assert!((extrapolate_to_zero(&h, &v) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn interval_domain_sum() {
        let gr = GridSpec::new(vec![0.0], vec![4.0], vec![9]).unwrap();
        let f = ExtGridFn::from_fn(gr.clone(), |x| if x[0] <= 1.0 { 0.0 } else { f64::INFINITY }).unwrap();
        let g = ExtGridFn::from_fn(gr, |x| if (2.0..=3.0).contains(&x[0]) { 0.0 } else { f64::INFINITY }).unwrap();
        let rep = domain_sum_check(&f, &g).unwrap();
        assert!(rep.equal);
        let r = infconv(&f, &g).unwrap();
        let pts: Vec<f64> = r.values.domain().iter().map(|&i| r.values.grid().coord(0, i)).collect();
        assert_eq!(pts.first(), Some(&2.0));
        assert_eq!(pts.last(), Some(&4.0));
    }
}
