//! Sharp trace Gagliardo–Nirenberg–Sobolev constants on cones and the weighted trace
//! inequality on convex epigraphs.

mod approx;

pub use approx::{approx_family, ApproxFamily};

use crate::bblcheck::{growth_condition, GrowthReport};
use crate::error::{Error, Result};
use crate::extgrid::EpigraphDomain;
use crate::field::{gradient_fd, gradient_or_fd, Field};
use crate::fixtures::{OffsetPower, PowerCost};
use crate::params::BblParams;
use crate::quad::{integrate_boundary, integrate_epigraph, QuadResult, QuadSpec, TailBound};
use crate::transforms::NormSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// I_α = ∫_Ω ‖x + e‖^{−α}. Diverges for α ≤ n.
pub fn i_alpha(domain: &EpigraphDomain, norm: &NormSpec, alpha: f64, quad: &QuadSpec) -> Result<QuadResult> {
    let n = domain.dim();
    if !(alpha > n as f64) {
        return Err(Error::InvalidArgument(format!("I_alpha diverges for alpha={alpha} <= n={n}")));
    }
    // ‖x+e‖ ≥ c|x+e|₂ ≥ c|x|₂/2 once |x|₂ ≥ 2
    let c = norm.euclid_lower_factor(n);
    let tail = TailBound { k: (2.0 / c).powf(alpha), beta: alpha };
    Ok(integrate_epigraph(quad, domain, 0.0, |x| offset_norm(norm, x).powf(-alpha), Some(tail)))
}

fn offset_norm(norm: &NormSpec, x: &[f64]) -> f64 {
    let mut z = x.to_vec();
    let n = z.len();
    z[n - 1] += 1.0;
    norm.norm(&z)
}

#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    pub c: f64,
    pub i_qa: QuadResult,
    /// ∫_{Ω₁}(C‖y‖^q/q)^{−a} by direct quadrature.
    pub direct: QuadResult,
}

/// C = q·I_{qa}^{1/a}, so that W = C‖·‖^q/q has ∫_{Ω₁} W^{−a} = 1.
pub fn normalize_power_cost(domain: &EpigraphDomain, norm: &NormSpec, q: f64, a: f64, quad: &QuadSpec) -> Result<Normalization> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
    }
    let i_qa = i_alpha(domain, norm, q * a, quad)?;
    let c = q * i_qa.value.powf(1.0 / a);
    let w = PowerCost::new(c, q, norm.clone(), domain.dim());
    let direct = integrate_epigraph(quad, domain, 1.0, |y| w.value(y).powf(-a), None);
    if (direct.value - 1.0).abs() > 0.01 {
        return Err(Error::NotNormalizable(format!("direct check of the normalisation gave {}", direct.value)));
    }
    Ok(Normalization { c, i_qa, direct })
}

/// The constant bundle of the trace inequality.
#[derive(Debug, Clone, Serialize)]
pub struct SharpConstants {
    pub params: BblParams,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a_const: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub u: f64,
    pub v: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub theta: f64,
    pub q_trace: f64,
    /// λ-exponent (a−n)(p−1)/(a−p); zero when a = n.
    pub s: f64,
    /// β of the extremal.
    pub beta: f64,
    /// None when a = n.
    pub lambda_star: Option<f64>,
    /// Coefficient of ‖∇f‖_p^θ‖f‖_{q_trace}^{1−θ} bounding the boundary L^{q_trace} norm.
    #[serde(rename = "D_npa")]
    pub d_npa: f64,
    pub i_qa: f64,
    pub i_qa1: f64,
    /// ∫_{Ω₁} W^{1−a} by direct quadrature.
    pub b_direct: f64,
    pub quad_error: f64,
}

/// Assembles the constants for any convex epigraph (no cone test).
pub fn assemble_constants(params: &BblParams, domain: &EpigraphDomain, norm: &NormSpec, quad: &QuadSpec) -> Result<SharpConstants> {
    params.validate()?;
    crate::error::check_dim(params.n, domain.dim())?;
    let (n, a, p, q) = (params.n as f64, params.a, params.p, params.q);
    let i_qa = i_alpha(domain, norm, q * a, quad)?;
    let i_qa1 = i_alpha(domain, norm, q * (a - 1.0), quad)?;
    let c = q * i_qa.value.powf(1.0 / a);
    let a_const = c.powf(1.0 - p) * (a - 1.0) / p * (p / (a - p)).powf(p);
    let b = i_qa.value.powf((1.0 - a) / a) * i_qa1.value;
    let u = (a - 1.0) / (a - p);
    let v = (a - 1.0) / (p - 1.0);
    let d = a_const.powf(u) / ((b * v).powf(u - 1.0) * u);
    let theta = (a - p) / (p * (a - n - 1.0) + n);
    let q_trace = p * (a - 1.0) / (a - p);
    let s = (a - n) * (p - 1.0) / (a - p);
    let beta = i_qa.value.powf((a - p) / (a * p));
    let (lambda_star, d_npa) = if a == n {
        (None, d.powf(1.0 / q_trace))
    } else {
        // extremal: ∫‖∇f‖_*^p = ((a−p)/(p−1))^p I_{q(a−1)} and ∫f^{q_trace} = I_{q(a−1)}
        let x = ((a - p) / (p - 1.0)).powf(p) * i_qa1.value;
        let k1 = d * x.powf(u);
        let k2 = (a - n) * i_qa1.value;
        let lam = (k2 / (s * k1)).powf(1.0 / (s + 1.0));
        let coef = (1.0 + s) * s.powf(-s / (s + 1.0)) * d.powf(1.0 / (s + 1.0)) * (a - n).powf(s / (s + 1.0));
        (Some(lam), coef.powf(1.0 / q_trace))
    };
    let w = PowerCost::new(c, q, norm.clone(), domain.dim());
    let b_direct = integrate_epigraph(quad, domain, 1.0, |y| w.value(y).powf(1.0 - a), None);
    Ok(SharpConstants {
        params: *params,
        c,
        a_const,
        b,
        u,
        v,
        d,
        theta,
        q_trace,
        s,
        beta,
        lambda_star,
        d_npa,
        i_qa: i_qa.value,
        i_qa1: i_qa1.value,
        b_direct: b_direct.value,
        quad_error: i_qa.error / i_qa.value + i_qa1.error / i_qa1.value,
    })
}

/// Constants of the trace Gagliardo–Nirenberg inequality on a cone.
pub fn gns_constants(params: &BblParams, domain: &EpigraphDomain, norm: &NormSpec, quad: &QuadSpec) -> Result<SharpConstants> {
    require_cone(domain)?;
    assemble_constants(params, domain, norm, quad)
}

fn require_cone(domain: &EpigraphDomain) -> Result<()> {
    let chk = domain.is_cone(256, 1e-9);
    if !chk.is_cone {
        return Err(Error::DomainRejected(format!(
            "domain is not a convex cone (worst violation {:.3e}, witness {:?})",
            chk.worst_violation, chk.witness
        )));
    }
    Ok(())
}

/// f(x) = ‖x + e‖^{−(a−p)/(p−1)}.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalSpec {
    pub exponent: f64,
    pub norm: NormSpec,
    pub n: usize,
}

impl ExtremalSpec {
    pub fn field(&self) -> OffsetPower {
        OffsetPower { gamma: self.exponent, norm: self.norm.clone(), n: self.n }
    }
}

pub fn extremal_f(params: &BblParams, norm: &NormSpec) -> Result<ExtremalSpec> {
    params.validate()?;
    if !(params.a > params.p) {
        return Err(Error::Hypothesis("a > p required".into()));
    }
    Ok(ExtremalSpec { exponent: -(params.a - params.p) / (params.p - 1.0), norm: norm.clone(), n: params.n })
}

/// max over random x of | ‖∇(‖x‖^γ)‖_* − |γ|‖x‖^{γ−1} | / (|γ|‖x‖^{γ−1}), with the
/// gradient from central differences. Points where the norm is not differentiable are resampled.
pub fn gradient_norm_claim_check(gamma: f64, norm: &NormSpec, n: usize, sample_count: usize, seed: u64) -> f64 {
    struct Pow<'a> {
        gamma: f64,
        norm: &'a NormSpec,
        n: usize,
    }
    impl Field for Pow<'_> {
        fn dim(&self) -> usize {
            self.n
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.norm.norm(x).powf(self.gamma)
        }
    }
    let f = Pow { gamma, norm, n };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < sample_count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = norm.norm(&x);
        // stay away from the kinks of ℓ¹/ℓ^∞ type norms
        if r < 0.1 || norm.gradient(&x).is_none() || x.iter().any(|v| v.abs() < 1e-3) {
            continue;
        }
        if let NormSpec::PNorm { p } | NormSpec::WeightedPNorm { p, .. } = norm {
            if p.is_infinite() {
                let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                a.sort_by(|u, v| v.total_cmp(u));
                if a.len() > 1 && a[0] - a[1] < 1e-3 {
                    continue;
                }
            }
        }
        let g = gradient_fd(&f, &x, 1e-6 * r);
        let lhs = norm.dual(&g);
        let rhs = gamma.abs() * r.powf(gamma - 1.0);
        worst = worst.max((lhs - rhs).abs() / rhs.max(1e-300));
        done += 1;
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub lhs_boundary: f64,
    pub rhs_value: f64,
    pub beta: f64,
    pub ratio: f64,
    pub quadrature_error: f64,
    /// ∫_∂ f^{q_trace} (weighted by P in the weighted check).
    pub boundary_integral: f64,
    /// ∫_Ω ‖∇f‖_*^p.
    pub gradient_integral: f64,
    /// ∫_Ω f^{q_trace}.
    pub volume_integral: f64,
    pub flagged_samples: usize,
    pub growth: Option<GrowthReport>,
}

struct TraceParts {
    boundary: QuadResult,
    grad: QuadResult,
    vol: QuadResult,
    beta_int: QuadResult,
    flagged: usize,
}

fn trace_parts(f: &(impl Field + ?Sized), params: &BblParams, domain: &EpigraphDomain, norm: &NormSpec, quad: &QuadSpec, weighted: bool) -> TraceParts {
    let (a, p) = (params.a, params.p);
    let qt = p * (a - 1.0) / (a - p);
    let n = domain.dim();
    let flagged = std::sync::atomic::AtomicUsize::new(0);
    let boundary = integrate_boundary(
        quad,
        domain,
        |x1| {
            let mut x = x1.to_vec();
            x.push(domain.phi(x1));
            let fv = f.value(&x).powf(qt);
            if weighted {
                let (w, fl) = domain.weight_p(x1);
                if fl {
                    // null set: skipped
                    flagged.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    return 0.0;
                }
                fv * w
            } else {
                fv
            }
        },
        None,
    );
    let grad = integrate_epigraph(quad, domain, 0.0, |x| norm.dual(&gradient_or_fd(f, x)).powf(p), None);
    let vol = integrate_epigraph(quad, domain, 0.0, |x| f.value(x).powf(qt), None);
    let beta_int = integrate_epigraph(quad, domain, 0.0, |x| f.value(x).powf(p * a / (a - p)), None);
    let _ = n;
    TraceParts { boundary, grad, vol, beta_int, flagged: flagged.into_inner() }
}

fn rel(r: &QuadResult) -> f64 {
    if r.value == 0.0 {
        0.0
    } else {
        (r.error / r.value).abs()
    }
}

/// (∫_∂ f^{q_t})^{1/q_t} against D_npa·‖∇f‖_p^θ·‖f‖_{q_t}^{1−θ} on a cone.
pub fn trace_gn_check(
    f: &(impl Field + ?Sized),
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    quad: &QuadSpec,
) -> Result<(TraceReport, SharpConstants)> {
    require_cone(domain)?;
    let k = assemble_constants(params, domain, norm, quad)?;
    let parts = trace_parts(f, params, domain, norm, quad, false);
    let (qt, th, p) = (k.q_trace, k.theta, params.p);
    let lhs = parts.boundary.value.powf(1.0 / qt);
    let rhs = k.d_npa * parts.grad.value.powf(th / p) * parts.vol.value.powf((1.0 - th) / qt);
    let ratio = lhs / rhs;
    let err = ratio * (rel(&parts.boundary) / qt + th / p * rel(&parts.grad) + (1.0 - th) / qt * rel(&parts.vol) + k.quad_error);
    let beta = parts.beta_int.value.powf((params.a - p) / (params.a * p));
    Ok((
        TraceReport {
            lhs_boundary: lhs,
            rhs_value: rhs,
            beta,
            ratio,
            quadrature_error: err,
            boundary_integral: parts.boundary.value,
            gradient_integral: parts.grad.value,
            volume_integral: parts.vol.value,
            flagged_samples: parts.flagged,
            growth: None,
        },
        k,
    ))
}

/// Growth-condition gate used by the weighted check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthGate {
    pub c: f64,
    pub r: f64,
    pub samples: usize,
}

impl Default for GrowthGate {
    fn default() -> Self {
        GrowthGate { c: 1.0, r: 10.0, samples: 400 }
    }
}

/// ∫ f^{q_t}(x₁, φ(x₁))P(x₁) against D·(∫‖∇f‖_*^p)^{(a−1)/(a−p)} + (a−n)∫f^{q_t}.
pub fn weighted_trace_check(
    f: &(impl Field + ?Sized),
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    quad: &QuadSpec,
    gate: &GrowthGate,
) -> Result<(TraceReport, SharpConstants)> {
    let growth = growth_condition(domain, gate.c, gate.r, gate.samples);
    if !growth.passes {
        return Err(Error::DomainRejected(format!(
            "growth condition fails: fitted ratio {:.6} > C = {} (witness x1 = {:?})",
            growth.fitted_ratio, gate.c, growth.witness
        )));
    }
    let k = assemble_constants(params, domain, norm, quad)?;
    let parts = trace_parts(f, params, domain, norm, quad, true);
    let nf = params.n as f64;
    let lhs = parts.boundary.value;
    let t1 = k.d * parts.grad.value.powf(k.u);
    let t2 = (params.a - nf) * parts.vol.value;
    let rhs = t1 + t2;
    let ratio = lhs / rhs;
    let err = (parts.boundary.error + t1 * (k.u * rel(&parts.grad) + k.quad_error) + t2 * rel(&parts.vol)) / rhs.abs();
    let beta = parts.beta_int.value.powf((params.a - params.p) / (params.a * params.p));
    Ok((
        TraceReport {
            lhs_boundary: lhs,
            rhs_value: rhs,
            beta,
            ratio,
            quadrature_error: err,
            boundary_integral: parts.boundary.value,
            gradient_integral: parts.grad.value,
            volume_integral: parts.vol.value,
            flagged_samples: parts.flagged,
            growth: Some(growth),
        },
        k,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungResidual {
    /// A/(Bv)·∫‖∇f‖_*^p
    pub lhs: f64,
    /// β^{p(p−1)(v−1)/(a−p)}
    pub rhs: f64,
    /// The same right side through I_{qa}^{(a−p)/a}.
    pub rhs_i_route: f64,
    pub residual: f64,
}

/// Relative gap in the Young equality condition for f.
pub fn young_equality_residual(
    f: &(impl Field + ?Sized),
    k: &SharpConstants,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    quad: &QuadSpec,
) -> YoungResidual {
    let (a, p) = (k.params.a, k.params.p);
    let grad = integrate_epigraph(quad, domain, 0.0, |x| norm.dual(&gradient_or_fd(f, x)).powf(p), None);
    let bint = integrate_epigraph(quad, domain, 0.0, |x| f.value(x).powf(p * a / (a - p)), None);
    let beta = bint.value.powf((a - p) / (a * p));
    let lhs = k.a_const / (k.b * k.v) * grad.value;
    let rhs = beta.powf(p * (p - 1.0) * (k.v - 1.0) / (a - p));
    YoungResidual { lhs, rhs, rhs_i_route: k.i_qa.powf((a - p) / a), residual: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()) }
}

/// |ratio − 1| of the cone trace check for the given quadrature steps.
pub fn trace_refinement(
    f: &(impl Field + ?Sized),
    params: &BblParams,
    domain: &EpigraphDomain,
    norm: &NormSpec,
    steps: &[f64],
) -> Result<Vec<(f64, f64)>> {
    steps
        .iter()
        .map(|&s| trace_gn_check(f, params, domain, norm, &QuadSpec::mapped(s)).map(|(r, _)| (s, (r.ratio - 1.0).abs())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_plane_moments() {
        let d = EpigraphDomain::half_space(2);
        let q = QuadSpec::default();
        let i4 = i_alpha(&d, &NormSpec::Euclidean, 4.0, &q).unwrap();
        assert!((i4.value / (PI / 4.0) - 1.0).abs() < 1e-8);
        let i6 = i_alpha(&d, &NormSpec::Euclidean, 6.0, &q).unwrap();
        assert!((i6.value / (3.0 * PI / 32.0) - 1.0).abs() < 1e-8);
        assert!(i_alpha(&d, &NormSpec::Euclidean, 2.0, &q).is_err());
    }

    #[test]
    fn half_plane_constants() {
        let d = EpigraphDomain::half_space(2);
        let p = BblParams::new(2, 2.0, 1.5).unwrap();
        let k = gns_constants(&p, &d, &NormSpec::Euclidean, &QuadSpec::default()).unwrap();
        assert!((k.c - 1.6281028237).abs() < 1e-8, "{}", k.c);
        assert!((k.a_const - 2.71487418697).abs() < 1e-8);
        assert!((k.b - 3.68527092552).abs() < 1e-8, "{} {}", k.b, k.i_qa1);
        assert!((k.d - 0.5).abs() < 1e-8);
        assert_eq!(k.theta, 1.0);
        assert!(k.lambda_star.is_none());
        assert!((k.b_direct / k.b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cone_constants() {
        let d = EpigraphDomain::cone(2, 1.0).unwrap();
        let p = BblParams::new(2, 2.5, 1.5).unwrap();
        let k = gns_constants(&p, &d, &NormSpec::Euclidean, &QuadSpec::default()).unwrap();
        assert!((k.c - 0.91037789932).abs() < 1e-8, "{}", k.c);
        assert!((k.b - 1.18515053940).abs() < 1e-8);
        assert!((k.d - 0.94460536450).abs() < 1e-8);
        assert!((k.theta - 0.8).abs() < 1e-14 && (k.q_trace - 2.25).abs() < 1e-14 && (k.s - 0.25).abs() < 1e-14);
        assert!(gns_constants(&p, &EpigraphDomain::paraboloid(2, 1.0).unwrap(), &NormSpec::Euclidean, &QuadSpec::default()).is_err());
    }

    #[test]
    fn claim_on_norms() {
        assert!(gradient_norm_claim_check(2.0, &NormSpec::Euclidean, 2, 50, 1) < 1e-6);
        assert!(gradient_norm_claim_check(-1.0, &NormSpec::PNorm { p: 3.0 }, 2, 50, 2) < 1e-6);
        assert!(gradient_norm_claim_check(1.0, &NormSpec::PNorm { p: 1.0 }, 3, 50, 3) < 1e-6);
    }
}
