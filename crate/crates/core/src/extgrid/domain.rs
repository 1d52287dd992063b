use super::{ExtGridFn, GridSpec};
use crate::error::{check_dim, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Declarative domain entry: `{"kind": "cone", "params": [1.0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// The closed family of boundary functions φ: ℝ^{n-1} → ℝ with φ(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiKind {
    /// φ ≡ 0.
    HalfSpace,
    /// φ(x₁) = slope·|x₁|₂.
    Cone { slope: f64 },
    /// φ(x₁) = coef·|x₁|₂².
    Paraboloid { coef: f64 },
    /// φ(x₁) = max_k (a_k·x₁ + b_k), with max_k b_k = 0.
    AffineMax { slopes: Vec<Vec<f64>>, intercepts: Vec<f64> },
}

/// Ω = {x : x_n ≥ φ(x₁)} ⊂ ℝⁿ with shift vector e = (0, …, 0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphDomain {
    n: usize,
    kind: PhiKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConeWitness {
    /// φ((x₁−y₁)/h) < (φ(x₁)−φ(y₁))/h by `violation`.
    Subadditivity { x1: Vec<f64>, y1: Vec<f64>, h: f64, violation: f64 },
    /// |φ(t x₁) − t φ(x₁)| = `violation`.
    Homogeneity { t: f64, x1: Vec<f64>, violation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeCheck {
    pub is_cone: bool,
    pub worst_violation: f64,
    pub witness: Option<ConeWitness>,
}

const CONE_SEED: u64 = 0x5eed_c0e;

impl EpigraphDomain {
    pub fn new(n: usize, kind: PhiKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("epigraph domains need n >= 2".into()));
        }
        match &kind {
            PhiKind::HalfSpace => {}
            PhiKind::Cone { slope } if *slope >= 0.0 && slope.is_finite() => {}
            PhiKind::Paraboloid { coef } if *coef >= 0.0 && coef.is_finite() => {}
            PhiKind::AffineMax { slopes, intercepts } => {
                if slopes.is_empty() || slopes.len() != intercepts.len() || slopes.iter().any(|a| a.len() != n - 1) {
                    return Err(Error::InvalidArgument("affine_max needs rows of n-1 slopes plus an intercept".into()));
                }
                let top = intercepts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if top.abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("affine_max must satisfy phi(0)=0, got {top}")));
                }
            }
            other => return Err(Error::InvalidArgument(format!("invalid phi parameters {other:?}"))),
        }
        Ok(EpigraphDomain { n, kind })
    }

    pub fn half_space(n: usize) -> Self {
        Self::new(n, PhiKind::HalfSpace).unwrap()
    }

    pub fn cone(n: usize, slope: f64) -> Result<Self> {
        Self::new(n, PhiKind::Cone { slope })
    }

    pub fn paraboloid(n: usize, coef: f64) -> Result<Self> {
        Self::new(n, PhiKind::Paraboloid { coef })
    }

    /// Rows `[a_1, …, a_{n-1}, b]`.
    pub fn affine_max(n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let slopes = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
        let intercepts = rows.iter().map(|r| r[r.len() - 1]).collect();
        Self::new(n, PhiKind::AffineMax { slopes, intercepts })
    }

    pub fn from_spec(spec: &DomainSpec, n: usize) -> Result<Self> {
        let p = &spec.params;
        match spec.kind.as_str() {
            "halfspace" | "half_space" => Ok(Self::half_space(n)),
            "cone" => Self::cone(n, p.first().copied().unwrap_or(1.0)),
            "paraboloid" => Self::paraboloid(n, p.first().copied().unwrap_or(1.0)),
            "affine_max" => {
                if p.is_empty() || p.len() % n != 0 {
                    return Err(Error::InvalidArgument(format!("affine_max params must come in rows of {n}")));
                }
                let rows: Vec<Vec<f64>> = p.chunks(n).map(|c| c.to_vec()).collect();
                Self::affine_max(n, &rows)
            }
            other => Err(Error::InvalidArgument(format!("unknown domain kind '{other}'"))),
        }
    }

    pub fn to_spec(&self) -> DomainSpec {
        let (kind, params) = match &self.kind {
            PhiKind::HalfSpace => ("halfspace", vec![]),
            PhiKind::Cone { slope } => ("cone", vec![*slope]),
            PhiKind::Paraboloid { coef } => ("paraboloid", vec![*coef]),
            PhiKind::AffineMax { slopes, intercepts } => (
                "affine_max",
                slopes.iter().zip(intercepts).flat_map(|(a, b)| a.iter().copied().chain(std::iter::once(*b))).collect(),
            ),
        };
        DomainSpec { kind: kind.into(), params }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn phi(&self, x1: &[f64]) -> f64 {
        self.perspective(x1, 1.0)
    }

    /// s·φ(x₁/s) for s > 0, evaluated in closed form (exact for the homogeneous kinds).
    pub fn perspective(&self, x1: &[f64], s: f64) -> f64 {
        match &self.kind {
            PhiKind::HalfSpace => 0.0,
            PhiKind::Cone { slope } => slope * norm2(x1),
            PhiKind::Paraboloid { coef } => coef * dot(x1, x1) / s,
            PhiKind::AffineMax { slopes, intercepts } => slopes
                .iter()
                .zip(intercepts)
                .map(|(a, b)| dot(a, x1) + s * b)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Analytic gradient of φ. At a non-differentiable point a subgradient is
    /// returned and the flag is set.
    pub fn grad_phi(&self, x1: &[f64]) -> (Vec<f64>, bool) {
        match &self.kind {
            PhiKind::HalfSpace => (vec![0.0; x1.len()], false),
            PhiKind::Cone { slope } => {
                let r = norm2(x1);
                if r == 0.0 {
                    (vec![0.0; x1.len()], true)
                } else {
                    (x1.iter().map(|v| slope * v / r).collect(), false)
                }
            }
            PhiKind::Paraboloid { coef } => (x1.iter().map(|v| 2.0 * coef * v).collect(), false),
            PhiKind::AffineMax { slopes, intercepts } => {
                let vals: Vec<f64> = slopes.iter().zip(intercepts).map(|(a, b)| dot(a, x1) + b).collect();
                let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let k = vals.iter().position(|&v| v == best).unwrap();
                let scale = 1.0 + best.abs();
                let tied = vals.iter().enumerate().any(|(j, &v)| j != k && best - v <= 1e-12 * scale);
                (slopes[k].clone(), tied)
            }
        }
    }

    /// Central finite-difference gradient with step 1e-6·(1+|x₁|).
    pub fn grad_phi_fd(&self, x1: &[f64]) -> Vec<f64> {
        let h = 1e-6 * (1.0 + norm2(x1));
        let mut y = x1.to_vec();
        (0..x1.len())
            .map(|k| {
                y[k] = x1[k] + h;
                let fp = self.phi(&y);
                y[k] = x1[k] - h;
                let fm = self.phi(&y);
                y[k] = x1[k];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    /// x ∈ Ω_h, i.e. x_n ≥ φ(x₁) + h.
    pub fn contains(&self, x: &[f64], h: f64) -> Result<bool> {
        check_dim(self.n, x.len())?;
        Ok(self.contains_unchecked(x, h))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64], h: f64) -> bool {
        x[self.n - 1] >= self.phi(&x[..self.n - 1]) + h
    }

    /// x ∈ B_h, i.e. x_n ≥ h + (1+h)·φ(x₁/(1+h)).
    pub fn bh_membership(&self, x: &[f64], h: f64) -> Result<bool> {
        check_dim(self.n, x.len())?;
        Ok(x[self.n - 1] >= self.bh_lower(&x[..self.n - 1], h))
    }

    /// Lower boundary of B_h above x₁.
    pub fn bh_lower(&self, x1: &[f64], h: f64) -> f64 {
        if h == 0.0 {
            self.phi(x1)
        } else {
            h + self.perspective(x1, 1.0 + h)
        }
    }

    /// Positive homogeneity of degree one, decided by the closed form.
    pub fn is_homogeneous(&self) -> bool {
        match &self.kind {
            PhiKind::HalfSpace | PhiKind::Cone { .. } => true,
            PhiKind::Paraboloid { coef } => *coef == 0.0,
            PhiKind::AffineMax { intercepts, .. } => intercepts.iter().all(|&b| b == 0.0),
        }
    }

    /// Randomised cone test: the subadditivity criterion on (x₁, y₁, h) triples
    /// and direct homogeneity checks on (t, x₁) pairs.
    pub fn is_cone(&self, sample_count: usize, tol: f64) -> ConeCheck {
        self.is_cone_seeded(sample_count, tol, CONE_SEED)
    }

    pub fn is_cone_seeded(&self, sample_count: usize, tol: f64, seed: u64) -> ConeCheck {
        let m = self.n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut witness = None;
        let record = |v: f64, w: ConeWitness, worst: &mut f64, witness: &mut Option<ConeWitness>| {
            if v > *worst {
                *worst = v;
                *witness = Some(w);
            }
        };
        for _ in 0..sample_count.max(1) {
            let x1: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y1: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let h: f64 = rng.gen_range(0.05..2.0);
            let d: Vec<f64> = x1.iter().zip(&y1).map(|(a, b)| (a - b) / h).collect();
            let lhs = self.phi(&d);
            let rhs = (self.phi(&x1) - self.phi(&y1)) / h;
            let v = (rhs - lhs) / (1.0 + lhs.abs().max(rhs.abs()));
            record(v, ConeWitness::Subadditivity { x1: x1.clone(), y1, h, violation: rhs - lhs }, &mut worst, &mut witness);

            let t: f64 = rng.gen_range(0.1..4.0);
            let tx: Vec<f64> = x1.iter().map(|v| t * v).collect();
            let a = self.phi(&tx);
            let b = t * self.phi(&x1);
            let v = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
            record(v, ConeWitness::Homogeneity { t, x1, violation: (a - b).abs() }, &mut worst, &mut witness);
        }
        // the deterministic probe t = 2, x₁ = (1, 0, …) catches curvature the random draw might miss
        let mut e1 = vec![0.0; m];
        e1[0] = 1.0;
        let a = self.phi(&e1.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
        let b = 2.0 * self.phi(&e1);
        let v = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
        record(v, ConeWitness::Homogeneity { t: 2.0, x1: e1, violation: (a - b).abs() }, &mut worst, &mut witness);

        let is_cone = worst <= tol;
        ConeCheck { is_cone, worst_violation: worst, witness: if is_cone { None } else { witness } }
    }

    /// P(x₁) = 1 + φ(x₁) − x₁·∇φ(x₁); the flag marks a subgradient sample.
    pub fn weight_p(&self, x1: &[f64]) -> (f64, bool) {
        let (g, flagged) = self.grad_phi(x1);
        (1.0 + self.phi(x1) - dot(x1, &g), flagged)
    }

    /// Points where φ fails to be smooth along each coordinate axis of ℝ^{n-1}
    /// (used to split quadrature lines).
    pub fn axis_breakpoints(&self, axis: usize) -> Vec<f64> {
        let mut b = vec![0.0];
        if let PhiKind::AffineMax { slopes, intercepts } = &self.kind {
            if self.n == 2 {
                for i in 0..slopes.len() {
                    for j in i + 1..slopes.len() {
                        let da = slopes[i][axis] - slopes[j][axis];
                        if da != 0.0 {
                            let x = (intercepts[j] - intercepts[i]) / da;
                            let v = slopes[i][axis] * x + intercepts[i];
                            if (self.phi(&[x]) - v).abs() <= 1e-12 * (1.0 + v.abs()) {
                                b.push(x);
                            }
                        }
                    }
                }
            }
        }
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        b.dedup_by(|a, c| (*a - *c).abs() < 1e-14);
        b
    }

    /// Samples `f` at nodes of Ω_h; nodes outside Ω_h get +∞.
    pub fn sample_grid(&self, grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync, h: f64) -> Result<ExtGridFn> {
        check_dim(self.n, grid.dim())?;
        let corner_hi = grid.hi.clone();
        if !self.contains_unchecked(&corner_hi, h) && !(0..grid.len()).any(|i| self.contains_unchecked(&grid.point_vec(i), h)) {
            return Err(Error::InvalidArgument("grid box does not meet the shifted domain".into()));
        }
        let vals = ExtGridFn::from_fn(grid, |x| if self.contains_unchecked(x, h) { f(x) } else { f64::INFINITY })?;
        for &i in vals.domain() {
            if vals.values()[i] < 0.0 {
                return Err(Error::InvalidSample {
                    coords: vals.grid().point_vec(i),
                    reason: format!("negative value {}", vals.values()[i]),
                });
            }
        }
        Ok(vals)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para() -> EpigraphDomain {
        EpigraphDomain::paraboloid(2, 1.0).unwrap()
    }

    #[test]
    fn contains_examples() {
        let hs = EpigraphDomain::half_space(2);
        assert!(hs.contains(&[0.5, 0.2], 0.0).unwrap());
        assert!(!hs.contains(&[0.5, 0.2], 0.3).unwrap());
        assert!(para().contains(&[1.0, 1.5], 0.4).unwrap());
        assert!(matches!(hs.contains(&[0.5], 0.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bh_on_paraboloid() {
        // 0.5 + 1.5·(1.2/1.5)² = 1.46 > 0.9, so the point lies in neither set
        let d = para();
        assert!(!d.bh_membership(&[1.2, 0.9], 0.5).unwrap());
        assert!(!d.contains(&[1.2, 0.9], 0.5).unwrap());
        assert!((d.bh_lower(&[1.2], 0.5) - 1.46).abs() < 1e-12);
        // a point of B_h outside Ω_h
        assert!(d.bh_membership(&[1.2, 1.6], 0.5).unwrap());
        assert!(!d.contains(&[1.2, 1.6], 0.5).unwrap());
    }

    #[test]
    fn cone_examples() {
        assert!(EpigraphDomain::cone(2, 1.0).unwrap().is_cone(200, 1e-12).is_cone);
        assert!(EpigraphDomain::half_space(3).is_cone(200, 1e-12).is_cone);
        let c = para().is_cone(200, 1e-9);
        assert!(!c.is_cone);
        assert!(c.witness.is_some());
        let am = EpigraphDomain::affine_max(2, &[vec![0.5, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(am.is_cone(200, 1e-12).is_cone);
        let am2 = EpigraphDomain::affine_max(2, &[vec![-1.0, 0.0], vec![0.5, 0.0], vec![2.0, -2.0]]).unwrap();
        assert!(!am2.is_cone(500, 1e-9).is_cone);
    }

    #[test]
    fn weight_examples() {
        let c = EpigraphDomain::cone(3, 1.0).unwrap();
        assert!((c.weight_p(&[0.3, -0.4]).0 - 1.0).abs() < 1e-15);
        assert!(c.weight_p(&[0.0, 0.0]).1);
        let p = EpigraphDomain::paraboloid(3, 1.0).unwrap();
        assert!((p.weight_p(&[0.3, 0.4]).0 - 0.75).abs() < 1e-15);
        assert!((p.weight_p(&[1.2, 1.6]).0 + 3.0).abs() < 1e-14);
    }

    #[test]
    fn sample_grid_examples() {
        let hs = EpigraphDomain::half_space(2);
        let g = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        let f = hs.sample_grid(g.clone(), |_| 1.0, 0.0).unwrap();
        assert_eq!(f.domain().len(), 15);
        assert!(hs.sample_grid(g.clone(), |_| -1.0, 0.0).is_err());
        let c = EpigraphDomain::cone(2, 1.0).unwrap();
        let f = c.sample_grid(g.clone(), |x| (x[0] * x[0] + (x[1] + 1.0).powi(2)).sqrt(), 0.0).unwrap();
        for i in 0..g.len() {
            let x = g.point_vec(i);
            assert_eq!(f.is_finite_at(i), x[1] >= x[0].abs());
        }
        let f = hs.sample_grid(g, |x| if x[0] > 0.0 { f64::INFINITY } else { 1.0 }, 0.0).unwrap();
        assert_eq!(f.domain().len(), 9);
    }

    #[test]
    fn spec_roundtrip() {
        let d = EpigraphDomain::affine_max(2, &[vec![-1.0, 0.0], vec![0.5, 0.0], vec![2.0, -2.0]]).unwrap();
        assert_eq!(EpigraphDomain::from_spec(&d.to_spec(), 2).unwrap(), d);
        assert!(EpigraphDomain::from_spec(&DomainSpec { kind: "ball".into(), params: vec![] }, 2).is_err());
        assert_eq!(d.axis_breakpoints(0), vec![0.0, 4.0 / 3.0]);
    }
}
