//! The three-way split of the difference quotient of h ↦ ∫_{B_h}Q_h^W(g)^{1−a}.

use super::admissibility::AdmissibilityParams;
use super::gap::{derivative_warnings, normalize_pair};
use crate::error::{Error, Result};
use crate::extgrid::EpigraphDomain;
use crate::field::{gradient_or_fd, Cost, Field};
use crate::hopflax::hopflax_pointwise;
use crate::params::BblParams;
use crate::quad::{integrate_boundary, integrate_columns, integrate_epigraph, QuadSpec};
use crate::transforms::NormSpec;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct AppendixRow {
    pub h: f64,
    /// ∫_{Ω_h}(Q_h^{1−a} − g^{1−a})/h
    pub term_i: f64,
    /// (1/h)∫_{Ω∖Ω_h} g^{1−a}
    pub term_ii: f64,
    /// (1/h)∫_{B_h∖Ω_h} Q_h^{1−a}
    pub term_iii: f64,
    /// (i) − (ii) + (iii)
    pub quotient: f64,
    pub residual: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixReport {
    pub params: BblParams,
    /// (a−1)∫W*(∇g)/g^a − ∫g^{1−a}(x₁,φ(x₁))P(x₁)dx₁
    pub limit: f64,
    pub boundary: f64,
    pub limit_error: f64,
    pub rows: Vec<AppendixRow>,
    pub warnings: Vec<String>,
}

impl AppendixReport {
    pub fn residuals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual).collect()
    }
}

/// Feasible starting points for the search in y at x ∈ B_h: the equality-case minimiser
/// (x+e)/(1+h), and x/(1+h) + c·e with c midway in the interval that keeps both
/// x − hy ∈ Ω and y ∈ Ω₁.
fn starts(domain: &EpigraphDomain, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut y0: Vec<f64> = x.iter().map(|v| v / (1.0 + h)).collect();
    y0[n - 1] += 1.0 / (1.0 + h);
    let psi = x[n - 1] / (1.0 + h) - domain.phi(&y0[..n - 1]);
    let (lo, hi) = (1.0 - psi, psi / h);
    let mut y1: Vec<f64> = x.iter().map(|v| v / (1.0 + h)).collect();
    y1[n - 1] += 0.5 * (lo + hi);
    vec![y0, y1]
}

/// Difference quotients of the left-hand side at each h, split into (i), (ii), (iii),
/// minus their common limit. g lives on Ω, W on Ω₁; both are rescaled to unit ∫·^{−a}.
pub fn appendix_limit_residual<G: Field + Clone, W: Cost + Clone>(
    g: &G,
    w: &W,
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    h_list: &[f64],
    quad: &QuadSpec,
    adm: Option<&AdmissibilityParams>,
) -> Result<AppendixReport> {
    params.validate()?;
    crate::error::check_dim(params.n, domain.dim())?;
    if h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument("h_list must hold positive reals".into()));
    }
    let a = params.a;
    let nz = normalize_pair(g, w, a, domain, quad)?;
    let (gs, ws) = (&nz.g, &nz.w);
    let on_boundary = |x1: &[f64]| {
        let mut x = x1.to_vec();
        x.push(domain.phi(x1));
        gs.value(&x).powf(1.0 - a)
    };
    let conj = integrate_epigraph(quad, domain, 0.0, |x| ws.conjugate(&gradient_or_fd(gs, x)) / gs.value(x).powf(a), None);
    let bnd = integrate_boundary(quad, domain, |x1| on_boundary(x1) * domain.weight_p(x1).0, None);
    let plain = integrate_boundary(quad, domain, on_boundary, None);
    let limit = (a - 1.0) * conj.value - bnd.value;
    let limit_error = (a - 1.0) * conj.error + bnd.error;
    let q = |x: &[f64], h: f64| hopflax_pointwise(gs, ws, h, x, &starts(domain, x, h)).0;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let ti = integrate_epigraph(quad, domain, h, |x| (q(x, h).powf(1.0 - a) - gs.value(x).powf(1.0 - a)) / h, None);
        let tii = integrate_columns(quad, domain, |x1| domain.phi(x1), |x1| domain.phi(x1) + h, |x| gs.value(x).powf(1.0 - a) / h, None);
        let tiii = integrate_columns(
            quad,
            domain,
            |x1| domain.bh_lower(x1, h),
            |x1| domain.phi(x1) + h,
            |x| q(x, h).powf(1.0 - a) / h,
            None,
        );
        let quotient = ti.value - tii.value + tiii.value;
        rows.push(AppendixRow {
            h,
            term_i: ti.value,
            term_ii: tii.value,
            term_iii: tiii.value,
            quotient,
            residual: quotient - limit,
            error: ti.error + tii.error + tiii.error + limit_error,
        });
    }
    Ok(AppendixReport {
        params: *params,
        limit,
        boundary: plain.value,
        limit_error,
        rows,
        warnings: derivative_warnings(gs, ws, params, domain, norm, adm),
    })
}
