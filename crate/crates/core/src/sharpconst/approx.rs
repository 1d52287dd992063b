//! f_ε = ε‖x + e‖^{−γ(a−p)/p} + C_ε f with ∫_Ω f_ε^{ap/(a−p)} = 1.

use crate::error::{Error, Result};
use crate::extgrid::{EpigraphDomain, ExtGridFn, GridSpec};
use crate::field::Field;
use crate::params::BblParams;
use crate::quad::{integrate_epigraph, QuadSpec};
use crate::transforms::NormSpec;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ApproxFamily<F> {
    #[serde(skip)]
    pub base: F,
    pub eps: f64,
    pub c_eps: f64,
    pub gamma: f64,
    /// γ(a−p)/p
    pub decay: f64,
    #[serde(skip)]
    pub norm: NormSpec,
    /// ∫_Ω f_ε^{ap/(a−p)} at the returned C_ε.
    pub mass: f64,
}

impl<F: Field> ApproxFamily<F> {
    pub fn sample(&self, domain: &EpigraphDomain, grid: GridSpec) -> Result<ExtGridFn> {
        domain.sample_grid(grid, |x| self.value(x), 0.0)
    }
}

impl<F: Field> Field for ApproxFamily<F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let mut z = x.to_vec();
        let n = z.len();
        z[n - 1] += 1.0;
        self.eps * self.norm.norm(&z).powf(-self.decay) + self.c_eps * self.base.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut z = x.to_vec();
        let n = z.len();
        z[n - 1] += 1.0;
        let r = self.norm.norm(&z);
        let gn = self.norm.gradient(&z)?;
        let gb = self.base.gradient(x)?;
        let s = -self.decay * self.eps * r.powf(-self.decay - 1.0);
        Some(gn.iter().zip(&gb).map(|(u, v)| s * u + self.c_eps * v).collect())
    }
}

/// Solves for C_ε by bisection. `f` must be normalised (∫f^{ap/(a−p)} = 1 within 1%)
/// and γ > max(1, a/(n−1)).
pub fn approx_family<F: Field + Clone>(
    f: &F,
    eps: f64,
    gamma: f64,
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    quad: &QuadSpec,
) -> Result<ApproxFamily<F>> {
    params.validate()?;
    let (a, p, n) = (params.a, params.p, params.n as f64);
    if !(gamma > 1.0f64.max(a / (n - 1.0))) {
        return Err(Error::Hypothesis(format!("gamma must exceed max(1, a/(n-1)), got {gamma}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument("eps must be nonnegative".into()));
    }
    let m = a * p / (a - p);
    let decay = gamma * (a - p) / p;
    let mass = |c: f64| {
        let fam = ApproxFamily { base: f.clone(), eps, c_eps: c, gamma, decay, norm: norm.clone(), mass: 0.0 };
        integrate_epigraph(quad, domain, 0.0, |x| fam.value(x).powf(m), None).value
    };
    let m1 = mass(1.0);
    let base_mass = {
        let fam = ApproxFamily { base: f.clone(), eps: 0.0, c_eps: 1.0, gamma, decay, norm: norm.clone(), mass: 0.0 };
        integrate_epigraph(quad, domain, 0.0, |x| fam.value(x).powf(m), None).value
    };
    if (base_mass - 1.0).abs() > 0.01 {
        return Err(Error::NotNormalizable(format!("base function has mass {base_mass}, expected 1")));
    }
    let build = |c: f64, mass: f64| ApproxFamily { base: f.clone(), eps, c_eps: c, gamma, decay, norm: norm.clone(), mass };
    if eps == 0.0 {
        return Ok(build(1.0, base_mass));
    }
    let m0 = mass(0.0);
    if m0 >= 1.0 {
        return Err(Error::InvalidArgument(format!("eps = {eps} too large: the tail alone has mass {m0}")));
    }
    // mass is increasing in c; bracket [0, hi]
    let mut hi = 1.0;
    let mut mh = m1;
    while mh < 1.0 {
        hi *= 2.0;
        mh = mass(hi);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    let mc = mass(c);
    Ok(build(c, mc))
}
