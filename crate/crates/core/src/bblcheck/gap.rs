//! The dynamical gap on grids and its derivative at h = 0 for analytic inputs.

use super::admissibility::{admissibility_report, growth_condition, AdmissibilityParams};
use crate::error::{Error, Result};
use crate::extgrid::{grid_integral, EpigraphDomain, ExtGridFn, GridSpec};
use crate::field::{gradient_or_fd, Cost, Field};
use crate::fixtures::Scaled;
use crate::hopflax::hopflax_apply_on;
use crate::params::BblParams;
use crate::quad::{integrate_boundary, integrate_epigraph, QuadSpec, TailBound};
use crate::transforms::NormSpec;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub params: BblParams,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs − rhs as computed.
    pub gap: f64,
    /// |gap_Δ − gap_{2Δ}| plus the truncation bound.
    pub quadrature_error_estimate: f64,
    pub tail: f64,
    pub terms: BTreeMap<String, f64>,
    /// Factors c_g, c_W applied so that ∫(c g)^{−a} = ∫(c W)^{−a} = 1.
    pub scale_g: f64,
    pub scale_w: f64,
    pub warnings: Vec<String>,
}

/// Growth envelopes of the unscaled inputs in the Euclidean norm: g ≥ A₃|x|^γ and
/// W ≥ A₁|y|^γ outside a ball of the given radius, which the grid box must contain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapTail {
    pub gamma: f64,
    pub a1: f64,
    pub a3: f64,
    pub radius: f64,
}

impl GapTail {
    /// ∫_{|x|>R} Q_h(c_g g)^{−s} for the rescaled pair.
    pub(crate) fn q_mass(&self, s: f64, n: usize, h: f64, cg: f64, cw: f64) -> f64 {
        let (a1, a3, gam) = (cw * self.a1, cg * self.a3, self.gamma);
        let e = -1.0 / (gam - 1.0);
        // Q_h(g) ≥ inf_y A₃|x − hy|^γ + hA₁|y|^γ = K_h|x|^γ
        let kh = (a3.powf(e) + h * a1.powf(e)).powf(1.0 - gam);
        TailBound { k: kh.powf(-s), beta: gam * s }.mass_outside(self.radius, n)
    }

    fn bounds(&self, a: f64, n: usize, h: f64, cg: f64, cw: f64) -> (f64, f64) {
        let (a1, a3, gam) = (cw * self.a1, cg * self.a3, self.gamma);
        let beta = gam * (a - 1.0);
        let q = self.q_mass(a - 1.0, n, h, cg, cw);
        let g = TailBound { k: a3.powf(1.0 - a), beta }.mass_outside(self.radius, n);
        let w = TailBound { k: a1.powf(1.0 - a), beta }.mass_outside((self.radius - 1.0).max(1e-3), n);
        ((1.0 + h).powf(a - n as f64) * q, g + h * w)
    }
}

fn grid_mass(f: &ExtGridFn, a: f64, what: &str) -> Result<f64> {
    let m = grid_integral(f, |v| v.powf(-a));
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::NotNormalizable(format!("grid integral of {what}^(-a) is {m}")));
    }
    Ok(m)
}

struct Sides {
    lhs: f64,
    rhs: f64,
    g_int: f64,
    w_int: f64,
    q_int: f64,
    cg: f64,
    cw: f64,
}

fn sides(g: &ExtGridFn, w: &ExtGridFn, a: f64, n: usize, h: f64) -> Result<Sides> {
    let cg = grid_mass(g, a, "g")?.powf(1.0 / a);
    let cw = grid_mass(w, a, "W")?.powf(1.0 / a);
    let (gs, ws) = (g.scaled(cg), w.scaled(cw));
    // Ω_h = Ω + h·e, so the g grid moved by h·e lines up with the domain of Q_h on cones
    let mut lo = gs.grid().lo.clone();
    let mut hi = gs.grid().hi.clone();
    lo[n - 1] += h;
    hi[n - 1] += h;
    let out = GridSpec::new(lo, hi, gs.grid().res.clone())?;
    let q = hopflax_apply_on(&gs, &ws, h, &out)?;
    let q_int = grid_integral(&q.values, |v| v.powf(1.0 - a));
    let g_int = grid_integral(&gs, |v| v.powf(1.0 - a));
    let w_int = grid_integral(&ws, |v| v.powf(1.0 - a));
    let lhs = (1.0 + h).powf(a - n as f64) * q_int;
    Ok(Sides { lhs, rhs: g_int + h * w_int, g_int, w_int, q_int, cg, cw })
}

/// (1+h)^{a−n}∫_{B_h}Q_h^W(g)^{1−a} against ∫_Ω g^{1−a} + h∫_{Ω₁}W^{1−a}, all by the
/// trapezoid rule over finite nodes. Q_h is evaluated on the g grid moved by h·e.
/// g and W are rescaled so that ∫g^{−a} = ∫W^{−a} = 1 on their grids. Both grids need odd resolutions: the error estimate reruns the whole
/// pipeline on every second node.
pub fn bbl_gap(g: &ExtGridFn, w: &ExtGridFn, params: &BblParams, tail: Option<GapTail>) -> Result<GapReport> {
    params.validate()?;
    crate::error::check_dim(params.n, g.dim())?;
    crate::error::check_dim(params.n, w.dim())?;
    let h = params.h.ok_or_else(|| Error::InvalidArgument("bbl_gap needs params.h".into()))?;
    let (a, n) = (params.a, params.n);
    let fine = sides(g, w, a, n, h)?;
    let (gc, wc) = match (g.subsampled(2), w.subsampled(2)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return Err(Error::InvalidArgument("bbl_gap needs odd grid resolutions for its error estimate".into())),
    };
    let coarse = sides(&gc, &wc, a, n, h)?;
    let (tl, tr) = tail.map(|t| t.bounds(a, n, h, fine.cg, fine.cw)).unwrap_or((0.0, 0.0));
    // both sides carry the same normalisation factor, so compare the gaps themselves
    let err = ((fine.lhs - fine.rhs) - (coarse.lhs - coarse.rhs)).abs() + tl + tr;
    let mut terms = BTreeMap::new();
    terms.insert("q_integral".into(), fine.q_int);
    terms.insert("g_integral".into(), fine.g_int);
    terms.insert("w_integral".into(), fine.w_int);
    terms.insert("lhs_coarse".into(), coarse.lhs);
    terms.insert("rhs_coarse".into(), coarse.rhs);
    Ok(GapReport {
        params: *params,
        h,
        lhs: fine.lhs,
        rhs: fine.rhs,
        gap: fine.lhs - fine.rhs,
        quadrature_error_estimate: err,
        tail: tl + tr,
        terms,
        scale_g: fine.cg,
        scale_w: fine.cw,
        warnings: vec![],
    })
}

pub(crate) struct Normalized<G, W> {
    pub g: Scaled<G>,
    pub w: Scaled<W>,
    pub err: f64,
}

/// Rescales analytic g on Ω and W on Ω₁ to unit ∫·^{−a}.
pub(crate) fn normalize_pair<G: Field + Clone, W: Cost + Clone>(
    g: &G,
    w: &W,
    a: f64,
    domain: &EpigraphDomain,
    quad: &QuadSpec,
) -> Result<Normalized<G, W>> {
    let ig = integrate_epigraph(quad, domain, 0.0, |x| g.value(x).powf(-a), None);
    let iw = integrate_epigraph(quad, domain, 1.0, |y| w.value(y).powf(-a), None);
    for (what, r) in [("g", &ig), ("W", &iw)] {
        if !(r.value > 0.0 && r.value.is_finite()) {
            return Err(Error::NotNormalizable(format!("integral of {what}^(-a) is {}", r.value)));
        }
    }
    Ok(Normalized {
        g: Scaled { inner: g.clone(), factor: ig.value.powf(1.0 / a) },
        w: Scaled { inner: w.clone(), factor: iw.value.powf(1.0 / a) },
        err: ig.error / ig.value + iw.error / iw.value,
    })
}

/// Hypothesis warnings for the derivative at h = 0.
pub(crate) fn derivative_warnings(
    g: &(impl Field + ?Sized),
    w: &(impl Field + ?Sized),
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    adm: Option<&AdmissibilityParams>,
) -> Vec<String> {
    let mut out = Vec::new();
    match adm {
        Some(adm) => {
            let rep = admissibility_report(g, w, adm, params, domain, norm, 32);
            for c in rep.conditions.iter().filter(|c| !c.passes) {
                out.push(format!("{} fails: supplied {}, fitted {} at {:?}", c.name, c.supplied, c.fitted, c.witness));
            }
            if !rep.growth.passes {
                out.push(format!("growth condition fails: ratio {} at {:?}", rep.growth.fitted_ratio, rep.growth.witness));
            }
        }
        None => {
            let gr = growth_condition(domain, 1.0, 10.0, 200);
            if !gr.passes {
                out.push(format!("growth condition fails: ratio {} at {:?}", gr.fitted_ratio, gr.witness));
            }
            out.push("admissibility not checked".into());
        }
    }
    out
}

/// (a−n)∫g^{1−a} + (a−1)∫W*(∇g)/g^a − ∫g^{1−a}(x₁, φ(x₁))P(x₁)dx₁ against ∫_{Ω₁}W^{1−a},
/// after rescaling g and W to unit ∫·^{−a}. Hypothesis failures become warnings.
pub fn derived_gap<G: Field + Clone, W: Cost + Clone>(
    g: &G,
    w: &W,
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    quad: &QuadSpec,
    adm: Option<&AdmissibilityParams>,
) -> Result<GapReport> {
    params.validate()?;
    crate::error::check_dim(params.n, domain.dim())?;
    let (a, nf) = (params.a, params.n as f64);
    let nz = normalize_pair(g, w, a, domain, quad)?;
    let (gs, ws) = (&nz.g, &nz.w);
    let vol = integrate_epigraph(quad, domain, 0.0, |x| gs.value(x).powf(1.0 - a), None);
    let conj = integrate_epigraph(
        quad,
        domain,
        0.0,
        |x| {
            let gv = gs.value(x);
            ws.conjugate(&gradient_or_fd(gs, x)) / gv.powf(a)
        },
        None,
    );
    let n = params.n;
    let bnd = integrate_boundary(
        quad,
        domain,
        |x1| {
            let mut x = x1.to_vec();
            x.push(domain.phi(x1));
            gs.value(&x).powf(1.0 - a) * domain.weight_p(x1).0
        },
        None,
    );
    let wint = integrate_epigraph(quad, domain, 1.0, |y| ws.value(y).powf(1.0 - a), None);
    debug_assert_eq!(n, domain.dim());
    let volume = if a == nf { 0.0 } else { (a - nf) * vol.value };
    let conjugate = (a - 1.0) * conj.value;
    let lhs = volume + conjugate - bnd.value;
    let rhs = wint.value;
    let err = (a - nf) * vol.error + (a - 1.0) * conj.error + bnd.error + wint.error + nz.err * (lhs.abs() + rhs.abs());
    let mut terms = BTreeMap::new();
    terms.insert("volume".into(), volume);
    terms.insert("conjugate".into(), conjugate);
    terms.insert("boundary".into(), bnd.value);
    Ok(GapReport {
        params: *params,
        h: 0.0,
        lhs,
        rhs,
        gap: lhs - rhs,
        quadrature_error_estimate: err,
        tail: 0.0,
        terms,
        scale_g: nz.g.factor,
        scale_w: nz.w.factor,
        warnings: derivative_warnings(gs, ws, params, domain, norm, adm),
    })
}
