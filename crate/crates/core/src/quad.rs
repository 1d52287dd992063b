//! Quadrature over epigraph domains, boundary graphs and strips between two graphs.
//!
//! `Mapped` applies the trapezoid rule after a double-exponential change of variables
//! (exp-sinh on half-lines, tanh-sinh on bounded intervals), splitting each axis of
//! ℝ^{n-1} at the kinks of φ. `Box` is the plain trapezoid rule on a truncated box plus
//! an analytic power-tail bound. Both report |I_Δ − I_{2Δ}| from the nested coarse rule.

use crate::extgrid::EpigraphDomain;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadSpec {
    /// Trapezoid in t after x = φ-anchored DE maps; `step` is the t-spacing.
    Mapped { step: f64, t_max: f64 },
    /// Trapezoid with spacing `spacing` on |x₁|_∞ ≤ half_width, 0 ≤ x_n − lower ≤ height.
    Box { half_width: f64, height: f64, spacing: f64 },
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec::Mapped { step: 0.05, t_max: 4.0 }
    }
}

impl QuadSpec {
    pub fn mapped(step: f64) -> Self {
        QuadSpec::Mapped { step, t_max: 4.0 }
    }

    /// Same rule with the step halved.
    pub fn refined(&self) -> Self {
        match *self {
            QuadSpec::Mapped { step, t_max } => QuadSpec::Mapped { step: step / 2.0, t_max },
            QuadSpec::Box { half_width, height, spacing } => QuadSpec::Box { half_width, height, spacing: spacing / 2.0 },
        }
    }

    pub fn step(&self) -> f64 {
        match *self {
            QuadSpec::Mapped { step, .. } => step,
            QuadSpec::Box { spacing, .. } => spacing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// |I_Δ − I_{2Δ}| plus the tail bound.
    pub error: f64,
    pub tail: f64,
}

/// |f(x)| ≤ k·|x|₂^{−β} outside the truncated region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub k: f64,
    pub beta: f64,
}

impl TailBound {
    /// ∫_{|x|>R} k|x|^{−β} dx in ℝ^d.
    pub fn mass_outside(&self, r: f64, d: usize) -> f64 {
        let df = d as f64;
        if self.beta <= df {
            return f64::INFINITY;
        }
        self.k * sphere_area(d) * r.powf(df - self.beta) / (self.beta - df)
    }
}

/// Surface area of the unit sphere S^{d−1} ⊂ ℝ^d.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    w: f64,
    /// weight multiplier in the nested coarse rule (2 or 0)
    c: f64,
}

fn de_steps(step: f64, t_max: f64) -> impl Iterator<Item = (i64, f64)> {
    let k = (t_max / step).floor() as i64;
    (-k..=k).map(move |i| (i, i as f64 * step))
}

fn half_line(a: f64, dir: f64, step: f64, t_max: f64, out: &mut Vec<Node>) {
    for (i, t) in de_steps(step, t_max) {
        let u = (FRAC_PI_2 * t.sinh()).exp();
        let w = step * u * FRAC_PI_2 * t.cosh();
        if u.is_finite() && w > 0.0 && w.is_finite() {
            out.push(Node { x: a + dir * u, w, c: if i % 2 == 0 { 2.0 } else { 0.0 } });
        }
    }
}

fn interval(a: f64, b: f64, step: f64, t_max: f64, out: &mut Vec<Node>) {
    if !(b > a) {
        return;
    }
    let half = 0.5 * (b - a);
    for (i, t) in de_steps(step, t_max) {
        let v = FRAC_PI_2 * t.sinh();
        let ch = v.cosh();
        let w = step * half * FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let d = (b - a) / (1.0 + (2.0 * v.abs()).exp());
        let x = if v >= 0.0 { b - d } else { a + d };
        if w > 0.0 && w.is_finite() && x > a && x < b {
            out.push(Node { x, w, c: if i % 2 == 0 { 2.0 } else { 0.0 } });
        }
    }
}

fn trapezoid(a: f64, b: f64, spacing: f64, out: &mut Vec<Node>) {
    if !(b > a) {
        return;
    }
    let m = ((b - a) / (2.0 * spacing)).ceil().max(1.0) as usize;
    let n = 2 * m;
    let h = (b - a) / n as f64;
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 * h } else { h };
        out.push(Node { x: a + i as f64 * h, w, c: if i % 2 == 0 { 2.0 } else { 0.0 } });
    }
}

/// DE rule on ℝ split at `breaks` (sorted).
fn line_rule(breaks: &[f64], step: f64, t_max: f64) -> Vec<Node> {
    let mut out = Vec::new();
    half_line(breaks[0], -1.0, step, t_max, &mut out);
    for w in breaks.windows(2) {
        interval(w[0], w[1], step, t_max, &mut out);
    }
    half_line(*breaks.last().unwrap(), 1.0, step, t_max, &mut out);
    out
}

fn outer_rule(spec: &QuadSpec, domain: &EpigraphDomain) -> Vec<(Vec<f64>, f64, f64)> {
    let m = domain.dim() - 1;
    let axes: Vec<Vec<Node>> = (0..m)
        .map(|d| match *spec {
            QuadSpec::Mapped { step, t_max } => line_rule(&domain.axis_breakpoints(d), step, t_max),
            QuadSpec::Box { half_width, spacing, .. } => {
                let mut v = Vec::new();
                trapezoid(-half_width, half_width, spacing, &mut v);
                v
            }
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; m];
    for _ in 0..total {
        let x: Vec<f64> = (0..m).map(|d| axes[d][idx[d]].x).collect();
        let w: f64 = (0..m).map(|d| axes[d][idx[d]].w).product();
        let c: f64 = (0..m).map(|d| axes[d][idx[d]].c).product();
        out.push((x, w, c));
        for d in (0..m).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

fn column_rule(spec: &QuadSpec, lo: f64, hi: f64) -> Vec<Node> {
    let mut v = Vec::new();
    match *spec {
        QuadSpec::Mapped { step, t_max } => {
            if hi.is_infinite() {
                half_line(lo, 1.0, step, t_max, &mut v);
            } else {
                interval(lo, hi, step, t_max, &mut v);
            }
        }
        QuadSpec::Box { height, spacing, .. } => trapezoid(lo, hi.min(lo + height), spacing, &mut v),
    }
    v
}

/// ∫ over {x : lower(x₁) ≤ x_n ≤ upper(x₁)} of f. `upper` may return +∞.
pub fn integrate_columns(
    spec: &QuadSpec,
    domain: &EpigraphDomain,
    lower: impl Fn(&[f64]) -> f64 + Sync,
    upper: impl Fn(&[f64]) -> f64 + Sync,
    f: impl Fn(&[f64]) -> f64 + Sync,
    tail: Option<TailBound>,
) -> QuadResult {
    let n = domain.dim();
    let outer = outer_rule(spec, domain);
    let parts: Vec<(f64, f64, f64)> = outer
        .par_iter()
        .map(|(x1, w1, c1)| {
            let lo = lower(x1);
            let hi = upper(x1);
            let mut x = x1.clone();
            x.push(0.0);
            let (mut fine, mut coarse) = (0.0, 0.0);
            for node in column_rule(spec, lo, hi) {
                x[n - 1] = node.x;
                let v = f(&x);
                fine += node.w * v;
                coarse += node.w * node.c * v;
            }
            (w1 * fine, w1 * c1 * coarse, lo)
        })
        .collect();
    let fine: f64 = parts.iter().map(|p| p.0).sum();
    let coarse: f64 = parts.iter().map(|p| p.1).sum();
    let tail_mass = match (spec, tail) {
        (QuadSpec::Box { half_width, height, .. }, Some(t)) => {
            let min_lo = parts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min).min(0.0);
            t.mass_outside(half_width.min(height + min_lo).max(1e-300), n)
        }
        _ => 0.0,
    };
    QuadResult { value: fine, error: (fine - coarse).abs() + tail_mass, tail: tail_mass }
}

/// ∫_{Ω_shift} f.
pub fn integrate_epigraph(
    spec: &QuadSpec,
    domain: &EpigraphDomain,
    shift: f64,
    f: impl Fn(&[f64]) -> f64 + Sync,
    tail: Option<TailBound>,
) -> QuadResult {
    integrate_columns(spec, domain, |x1| domain.phi(x1) + shift, |_| f64::INFINITY, f, tail)
}

/// ∫_{ℝ^{n-1}} f(x₁) dx₁.
pub fn integrate_boundary(
    spec: &QuadSpec,
    domain: &EpigraphDomain,
    f: impl Fn(&[f64]) -> f64 + Sync,
    tail: Option<TailBound>,
) -> QuadResult {
    let outer = outer_rule(spec, domain);
    let vals: Vec<(f64, f64)> = outer.par_iter().map(|(x1, w, c)| {
        let v = f(x1);
        (w * v, w * c * v)
    }).collect();
    let fine: f64 = vals.iter().map(|v| v.0).sum();
    let coarse: f64 = vals.iter().map(|v| v.1).sum();
    let tail_mass = match (spec, tail) {
        (QuadSpec::Box { half_width, .. }, Some(t)) => t.mass_outside(*half_width, domain.dim() - 1),
        _ => 0.0,
    };
    QuadResult { value: fine, error: (fine - coarse).abs() + tail_mass, tail: tail_mass }
}

/// ∫_a^b f on a bounded interval with the same rule family.
pub fn integrate_interval(spec: &QuadSpec, a: f64, b: f64, f: impl Fn(f64) -> f64) -> QuadResult {
    let mut nodes = Vec::new();
    match *spec {
        QuadSpec::Mapped { step, t_max } => interval(a, b, step, t_max, &mut nodes),
        QuadSpec::Box { spacing, .. } => trapezoid(a, b, spacing, &mut nodes),
    }
    let (mut fine, mut coarse) = (0.0, 0.0);
    for nd in nodes {
        let v = f(nd.x);
        fine += nd.w * v;
        coarse += nd.w * nd.c * v;
    }
    QuadResult { value: fine, error: (fine - coarse).abs(), tail: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn half_line_and_interval_rules() {
        let mut v = Vec::new();
        half_line(0.0, 1.0, 0.1, 4.0, &mut v);
        let s: f64 = v.iter().map(|n| n.w * (-n.x).exp()).sum();
        assert!((s - 1.0).abs() < 1e-11, "{s}");
        let r = integrate_interval(&QuadSpec::mapped(0.1), 0.0, 2.0, |x| x.sqrt());
        assert!((r.value - 2.0 * 2f64.sqrt() * 2.0 / 3.0).abs() < 1e-10);
        let r = integrate_interval(&QuadSpec::Box { half_width: 1.0, height: 1.0, spacing: 0.01 }, 0.0, 1.0, |x| x * x);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-4 && r.error > 0.0);
    }

    #[test]
    fn half_plane_moment() {
        // ∫_{x₂≥0} |x + e|^{-4} = π/4
        let d = EpigraphDomain::half_space(2);
        let f = |x: &[f64]| (x[0] * x[0] + (x[1] + 1.0).powi(2)).powi(-2);
        let r = integrate_epigraph(&QuadSpec::mapped(0.1), &d, 0.0, f, None);
        assert!((r.value - PI / 4.0).abs() < 1e-9, "{r:?}");
        let b = integrate_epigraph(
            &QuadSpec::Box { half_width: 40.0, height: 40.0, spacing: 0.05 },
            &d,
            0.0,
            f,
            Some(TailBound { k: 1.0, beta: 4.0 }),
        );
        assert!((b.value - PI / 4.0).abs() <= b.error, "{b:?}");
    }

    #[test]
    fn boundary_integral_with_kinks() {
        // ∫ (1 + |x|)^{-3} over ℝ = 1, split at the affine-max kinks
        let d = EpigraphDomain::affine_max(2, &[vec![-1.0, 0.0], vec![0.5, 0.0], vec![2.0, -2.0]]).unwrap();
        let r = integrate_boundary(&QuadSpec::mapped(0.1), &d, |x| (1.0 + x[0].abs()).powi(-3), None);
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn strip_between_graphs() {
        // area between x₂ = x₁² and x₂ = 1 is 4/3; the column length has a kink at |x₁| = 1
        let d = EpigraphDomain::paraboloid(2, 1.0).unwrap();
        let r = integrate_columns(
            &QuadSpec::mapped(0.05),
            &d,
            |x| x[0] * x[0],
            |_| 1.0,
            |_| 1.0,
            None,
        );
        assert!((r.value - 4.0 / 3.0).abs() <= r.error && r.error < 1e-2, "{r:?}");
    }
}
