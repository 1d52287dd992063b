//! Analytic functions used as g, W and f in the checks.

use crate::bblcheck::GapTail;
use crate::error::Result;
use crate::extgrid::{EpigraphDomain, ExtGridFn, GridSpec};
use crate::params::BblParams;
use crate::quad::QuadSpec;
use crate::sharpconst::normalize_power_cost;
use crate::field::{Cost, Field};
use crate::optim::pattern_search;
use crate::transforms::NormSpec;

/// W(y) = C‖y‖^q/q, optionally restricted to Ω₁ = Ω + e (+∞ elsewhere).
#[derive(Debug, Clone)]
pub struct PowerCost {
    pub c: f64,
    pub q: f64,
    pub norm: NormSpec,
    pub restrict: Option<EpigraphDomain>,
    pub n: usize,
}

impl PowerCost {
    pub fn new(c: f64, q: f64, norm: NormSpec, n: usize) -> Self {
        PowerCost { c, q, norm, restrict: None, n }
    }

    pub fn on_shifted(c: f64, q: f64, norm: NormSpec, domain: &EpigraphDomain) -> Self {
        PowerCost { c, q, norm, restrict: Some(domain.clone()), n: domain.dim() }
    }

    fn raw(&self, y: &[f64]) -> f64 {
        self.c * self.norm.norm(y).powf(self.q) / self.q
    }

    pub fn unrestricted_conjugate(&self, z: &[f64]) -> f64 {
        let p = self.q / (self.q - 1.0);
        self.c.powf(1.0 - p) * self.norm.dual(z).powf(p) / p
    }

    /// Maximiser of y·z − C‖y‖^q/q over ℝⁿ.
    pub fn unrestricted_maximiser(&self, z: &[f64]) -> Vec<f64> {
        let r = (self.norm.dual(z) / self.c).powf(1.0 / (self.q - 1.0));
        self.norm.dual_direction(z).into_iter().map(|u| r * u).collect()
    }
}

impl Field for PowerCost {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        if let Some(d) = &self.restrict {
            if !d.contains_unchecked(y, 1.0) {
                return f64::INFINITY;
            }
        }
        self.raw(y)
    }

    fn gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        let r = self.norm.norm(y);
        if r == 0.0 {
            return Some(vec![0.0; y.len()]);
        }
        let g = self.norm.gradient(y)?;
        let s = self.c * r.powf(self.q - 1.0);
        Some(g.into_iter().map(|v| s * v).collect())
    }
}

impl Cost for PowerCost {
    /// Exact conjugate of the (possibly restricted) cost. When the free maximiser leaves
    /// Ω₁ the supremum sits on ∂Ω₁ and is found by a boundary search.
    fn conjugate(&self, z: &[f64]) -> f64 {
        let free = self.unrestricted_conjugate(z);
        let Some(d) = &self.restrict else { return free };
        let ystar = self.unrestricted_maximiser(z);
        if d.contains_unchecked(&ystar, 1.0) {
            return free;
        }
        let n = self.n;
        let obj = |y1: &[f64]| {
            let mut y = y1.to_vec();
            y.push(1.0 + d.phi(y1));
            let dotp: f64 = y.iter().zip(z).map(|(a, b)| a * b).sum();
            -(dotp - self.raw(&y))
        };
        let scale = 1.0 + ystar.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let starts = [ystar[..n - 1].to_vec(), vec![0.0; n - 1], ystar[..n - 1].iter().map(|v| 0.5 * v).collect()];
        let mut best = f64::INFINITY;
        for s in &starts {
            let (_, v) = pattern_search(obj, s, 0.25 * scale, 1e-13);
            best = best.min(v);
        }
        (-best).min(free)
    }

    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        let ystar = self.unrestricted_maximiser(z);
        match &self.restrict {
            Some(d) if !d.contains_unchecked(&ystar, 1.0) => None,
            _ => Some(ystar),
        }
    }
}

/// x ↦ inner(x + shift).
#[derive(Debug, Clone)]
pub struct Shifted<F> {
    pub inner: F,
    pub shift: Vec<f64>,
}

impl<F: Field> Shifted<F> {
    /// g(x) = W(x + e).
    pub fn by_e(inner: F) -> Self {
        let n = inner.dim();
        let mut shift = vec![0.0; n];
        shift[n - 1] = 1.0;
        Shifted { inner, shift }
    }

    fn moved(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(a, b)| a + b).collect()
    }
}

impl<F: Field> Field for Shifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.moved(x))
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.gradient(&self.moved(x))
    }
}

/// x ↦ factor·inner(x), factor > 0.
#[derive(Debug, Clone)]
pub struct Scaled<F> {
    pub inner: F,
    pub factor: f64,
}

impl<F: Field> Field for Scaled<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.gradient(x).map(|g| g.into_iter().map(|v| self.factor * v).collect())
    }
}

impl<F: Cost> Cost for Scaled<F> {
    /// (cW)*(z) = c·W*(z/c).
    fn conjugate(&self, z: &[f64]) -> f64 {
        let zz: Vec<f64> = z.iter().map(|v| v / self.factor).collect();
        self.factor * self.inner.conjugate(&zz)
    }

    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        let zz: Vec<f64> = z.iter().map(|v| v / self.factor).collect();
        self.inner.conjugate_maximiser(&zz)
    }
}

/// x ↦ inner(λx).
#[derive(Debug, Clone)]
pub struct Dilated<F> {
    pub inner: F,
    pub lambda: f64,
}

impl<F: Field> Field for Dilated<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        self.inner.value(&y)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let y: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        self.inner.gradient(&y).map(|g| g.into_iter().map(|v| self.lambda * v).collect())
    }
}

/// +∞ outside Ω_shift, inner inside.
#[derive(Debug, Clone)]
pub struct Restricted<F> {
    pub inner: F,
    pub domain: EpigraphDomain,
    pub shift: f64,
}

impl<F: Field> Field for Restricted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        if self.domain.contains_unchecked(x, self.shift) {
            self.inner.value(x)
        } else {
            f64::INFINITY
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.gradient(x)
    }
}

/// ‖x + e‖^γ; with γ = −(a−p)/(p−1) this is the trace extremal.
#[derive(Debug, Clone)]
pub struct OffsetPower {
    pub gamma: f64,
    pub norm: NormSpec,
    pub n: usize,
}

impl OffsetPower {
    fn z(&self, x: &[f64]) -> Vec<f64> {
        let mut z = x.to_vec();
        z[self.n - 1] += 1.0;
        z
    }
}

impl Field for OffsetPower {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.norm.norm(&self.z(x)).powf(self.gamma)
    }
    /// γ‖z‖^{γ−1}∇‖z‖, whose dual norm is |γ|‖z‖^{γ−1}.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let z = self.z(x);
        let r = self.norm.norm(&z);
        let g = self.norm.gradient(&z)?;
        let s = self.gamma * r.powf(self.gamma - 1.0);
        Some(g.into_iter().map(|v| s * v).collect())
    }
}

/// amp·exp(1 − 1/(1 − |x−c|²/R²)) inside the ball, 0 outside; peak value amp.
#[derive(Debug, Clone)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amp: f64,
}

impl Field for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            self.amp * (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r2 = self.radius * self.radius;
        let s: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / r2;
        if s >= 1.0 {
            return Some(vec![0.0; x.len()]);
        }
        let v = self.amp * (1.0 - 1.0 / (1.0 - s)).exp();
        let k = -v / ((1.0 - s) * (1.0 - s)) * 2.0 / r2;
        Some(x.iter().zip(&self.center).map(|(a, b)| k * (a - b)).collect())
    }
}

/// base + bump (the perturbation keeps +∞ where base is +∞).
#[derive(Debug, Clone)]
pub struct Sum<F, G> {
    pub base: F,
    pub extra: G,
}

impl<F: Field, G: Field> Field for Sum<F, G> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(x) + self.extra.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let a = self.base.gradient(x)?;
        let b = self.extra.gradient(x)?;
        Some(a.into_iter().zip(b).map(|(u, v)| u + v).collect())
    }
}

/// 2 + ½|x|² + 0.3·sin(x₀ + ½x₁): smooth, positive, locally Lipschitz.
#[derive(Debug, Clone, Copy)]
pub struct SmoothBowl;

impl Field for SmoothBowl {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        2.0 + 0.5 * (x[0] * x[0] + x[1] * x[1]) + 0.3 * (x[0] + 0.5 * x[1]).sin()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let c = 0.3 * (x[0] + 0.5 * x[1]).cos();
        Some(vec![x[0] + c, x[1] + 0.5 * c])
    }
}

/// κ(1 + |x|²)^m on ℝⁿ (Euclidean); convex for m ≥ 1.
#[derive(Debug, Clone, Copy)]
pub struct RadialPower {
    pub kappa: f64,
    pub m: f64,
    pub n: usize,
}

impl Field for RadialPower {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.kappa * (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(self.m)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let k = self.kappa * self.m * 2.0 * s.powf(self.m - 1.0);
        Some(x.iter().map(|v| k * v).collect())
    }
}

impl RadialPower {
    /// Radius r ≥ 0 solving 2κm·r(1+r²)^{m−1} = t, the radial maximiser of r·t − κ(1+r²)^m.
    fn radial_root(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let g = |r: f64| 2.0 * self.kappa * self.m * r * (1.0 + r * r).powf(self.m - 1.0) - t;
        let (mut lo, mut hi) = (0.0, 1.0);
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

impl Cost for RadialPower {
    /// Requires m ≥ 1/2 so the radial derivative is increasing.
    fn conjugate(&self, z: &[f64]) -> f64 {
        let t = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = self.radial_root(t);
        r * t - self.kappa * (1.0 + r * r).powf(self.m)
    }

    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        let t = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if t == 0.0 {
            return Some(vec![0.0; z.len()]);
        }
        let r = self.radial_root(t);
        Some(z.iter().map(|v| r * v / t).collect())
    }
}

/// The equality pair g = W(· + e), W = C‖·‖^q/q on Ω₁ with C from `normalize_power_cost`.
#[derive(Debug, Clone)]
pub struct ExtremalPair {
    pub g: Shifted<PowerCost>,
    pub w: PowerCost,
    pub c: f64,
    pub q: f64,
}

impl ExtremalPair {
    pub fn new(domain: &EpigraphDomain, norm: &NormSpec, params: &BblParams, quad: &QuadSpec) -> Result<Self> {
        let c = normalize_power_cost(domain, norm, params.q, params.a, quad)?.c;
        let w = PowerCost::on_shifted(c, params.q, norm.clone(), domain);
        Ok(ExtremalPair { g: Shifted::by_e(w.clone()), w, c, q: params.q })
    }

    /// Euclidean growth envelopes outside the ball of the given radius. On Ω we have
    /// |x + e| ≥ |x|, so g and W share the constant C·λ^q/q where ‖·‖ ≥ λ|·|.
    pub fn tail(&self, radius: f64) -> GapTail {
        let k = self.c * self.w.norm.euclid_lower_factor(self.w.n).powf(self.q) / self.q;
        GapTail { gamma: self.q, a1: k, a3: k, radius }
    }

    /// g on [−R, R]^{n−1} × [0, 2R] and W on the same box moved by e, `res` nodes per axis,
    /// with an optional bump added to g.
    pub fn sample(&self, domain: &EpigraphDomain, half_width: f64, res: usize, bump: Option<&Bump>) -> Result<(ExtGridFn, ExtGridFn)> {
        let n = self.w.n;
        let mut lo = vec![-half_width; n];
        let mut hi = vec![half_width; n];
        lo[n - 1] = 0.0;
        hi[n - 1] = 2.0 * half_width;
        let gg = GridSpec::new(lo.clone(), hi.clone(), vec![res; n])?;
        lo[n - 1] += 1.0;
        hi[n - 1] += 1.0;
        let wg = GridSpec::new(lo, hi, vec![res; n])?;
        let g = domain.sample_grid(gg, |x| self.g.value(x) + bump.map_or(0.0, |b| b.value(x)), 0.0)?;
        let w = domain.sample_grid(wg, |y| self.w.value(y), 1.0)?;
        Ok((g, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gradient_fd;

    #[test]
    fn radial_conjugate_matches_sup() {
        let w = RadialPower { kappa: (std::f64::consts::PI / 3.0).sqrt(), m: 2.0, n: 2 };
        let z = [1.3, -0.4];
        let y = w.conjugate_maximiser(&z).unwrap();
        let g = w.gradient(&y).unwrap();
        assert!((g[0] - z[0]).abs() < 1e-10 && (g[1] - z[1]).abs() < 1e-10);
        let (_, v) = pattern_search(|y| w.value(y) - y[0] * z[0] - y[1] * z[1], &[0.0, 0.0], 0.5, 1e-14);
        assert!((w.conjugate(&z) + v).abs() < 1e-10);
    }

    fn check_grad(f: &dyn Field, x: &[f64]) {
        let a = f.gradient(x).unwrap();
        let b = gradient_fd(f, x, 1e-6);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-6 * (1.0 + u.abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn gradients_match_differences() {
        let x = [0.3, 0.8];
        check_grad(&PowerCost::new(1.7, 3.0, NormSpec::PNorm { p: 3.0 }, 2), &x);
        check_grad(&OffsetPower { gamma: -1.0, norm: NormSpec::Euclidean, n: 2 }, &x);
        check_grad(&Bump { center: vec![0.0, 0.5], radius: 1.0, amp: 0.4 }, &x);
        check_grad(&SmoothBowl, &x);
        check_grad(&RadialPower { kappa: 0.7, m: 2.0, n: 2 }, &x);
        check_grad(&Dilated { inner: SmoothBowl, lambda: 2.0 }, &x);
    }

    #[test]
    fn restricted_conjugate_is_below_free_and_attained() {
        let d = EpigraphDomain::half_space(2);
        let w = PowerCost::on_shifted(1.0, 2.0, NormSpec::Euclidean, &d);
        // free maximiser z itself lies in Ω₁
        assert!((w.conjugate(&[0.3, 2.0]) - w.unrestricted_conjugate(&[0.3, 2.0])).abs() < 1e-15);
        // free maximiser (0.3, 0.2) is outside: sup over y₂ ≥ 1 is at y = (0.3, 1)
        let z = [0.3, 0.2];
        let expect = 0.3 * 0.3 + 0.2 - 0.5 * (0.09 + 1.0);
        assert!((w.conjugate(&z) - expect).abs() < 1e-10, "{} vs {expect}", w.conjugate(&z));
    }

    #[test]
    fn scaled_conjugate_rule() {
        let w = PowerCost::new(1.0, 2.0, NormSpec::Euclidean, 2);
        let s = Scaled { inner: w.clone(), factor: 3.0 };
        let direct = PowerCost::new(3.0, 2.0, NormSpec::Euclidean, 2);
        assert!((s.conjugate(&[0.4, -1.0]) - direct.conjugate(&[0.4, -1.0])).abs() < 1e-14);
    }
}
