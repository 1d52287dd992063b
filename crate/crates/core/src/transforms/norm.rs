use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A norm on ℝⁿ with closed-form dual.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Euclidean,
    /// ℓ^p with p ∈ [1, ∞]; `f64::INFINITY` is the max norm.
    PNorm { p: f64 },
    /// (Σ wᵢ|xᵢ|^p)^{1/p} for finite p, max wᵢ|xᵢ| for p = ∞.
    WeightedPNorm { p: f64, weights: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Num(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct RawNorm {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let exp = |p: f64| if p.is_infinite() { Exponent::Text("inf".into()) } else { Exponent::Num(p) };
        let raw = match self {
            NormSpec::Euclidean => RawNorm { kind: "euclidean".into(), p: None, weights: None },
            NormSpec::PNorm { p } => RawNorm { kind: "p_norm".into(), p: Some(exp(*p)), weights: None },
            NormSpec::WeightedPNorm { p, weights } => {
                RawNorm { kind: "weighted_p_norm".into(), p: Some(exp(*p)), weights: Some(weights.clone()) }
            }
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawNorm::deserialize(d)?;
        let p = match raw.p {
            None => None,
            Some(Exponent::Num(v)) => Some(v),
            Some(Exponent::Text(t)) if t == "inf" || t == "infinity" => Some(f64::INFINITY),
            Some(Exponent::Text(t)) => return Err(D::Error::custom(format!("bad exponent '{t}'"))),
        };
        let spec = match raw.kind.as_str() {
            "euclidean" => NormSpec::Euclidean,
            "p_norm" => NormSpec::PNorm { p: p.ok_or_else(|| D::Error::custom("p_norm needs p"))? },
            "weighted_p_norm" => NormSpec::WeightedPNorm {
                p: p.ok_or_else(|| D::Error::custom("weighted_p_norm needs p"))?,
                weights: raw.weights.ok_or_else(|| D::Error::custom("weighted_p_norm needs weights"))?,
            },
            other => return Err(D::Error::custom(format!("unknown norm kind '{other}'"))),
        };
        spec.validate().map_err(D::Error::custom)?;
        Ok(spec)
    }
}

/// Hölder conjugate p' with 1/p + 1/p' = 1.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Euclidean => Ok(()),
            NormSpec::PNorm { p } if *p >= 1.0 => Ok(()),
            NormSpec::WeightedPNorm { p, weights } if *p >= 1.0 && weights.iter().all(|w| *w > 0.0 && w.is_finite()) => Ok(()),
            other => Err(Error::InvalidArgument(format!("invalid norm {other:?}"))),
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormSpec::PNorm { p } => lp(x, *p, None),
            NormSpec::WeightedPNorm { p, weights } => lp(x, *p, Some(weights)),
        }
    }

    /// The dual norm as a norm spec.
    pub fn dual_spec(&self) -> NormSpec {
        match self {
            NormSpec::Euclidean => NormSpec::Euclidean,
            NormSpec::PNorm { p } => NormSpec::PNorm { p: conjugate_exponent(*p) },
            NormSpec::WeightedPNorm { p, weights } => {
                let pd = conjugate_exponent(*p);
                let w = if p.is_infinite() {
                    // dual of max wᵢ|xᵢ| is Σ|yᵢ|/wᵢ
                    weights.iter().map(|w| 1.0 / w).collect()
                } else if *p == 1.0 {
                    // dual of Σwᵢ|xᵢ| is max |yᵢ|/wᵢ
                    weights.iter().map(|w| 1.0 / w).collect()
                } else {
                    weights.iter().map(|w| w.powf(1.0 - pd)).collect()
                };
                NormSpec::WeightedPNorm { p: pd, weights: w }
            }
        }
    }

    /// ‖y‖_* = sup_{‖x‖=1} x·y in closed form.
    pub fn dual(&self, y: &[f64]) -> f64 {
        self.dual_spec().norm(y)
    }

    /// Lower bound of ‖y‖_* by maximising x·y over `n_dirs` sampled unit vectors
    /// (n = 2: uniform angles; n ≥ 3: Fibonacci-type spiral on the sphere), with the
    /// gap to the half-density sample as an error estimate.
    pub fn dual_sampled(&self, y: &[f64], n_dirs: usize) -> (f64, f64) {
        let full = self.sampled_sup(y, n_dirs);
        let half = self.sampled_sup(y, (n_dirs / 2).max(1));
        (full, (full - half).abs())
    }

    fn sampled_sup(&self, y: &[f64], n_dirs: usize) -> f64 {
        let n = y.len();
        let mut best = f64::NEG_INFINITY;
        let mut x = vec![0.0; n];
        for k in 0..n_dirs {
            unit_direction(n, k, n_dirs, &mut x);
            let r = self.norm(&x);
            let v: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / r;
            best = best.max(v);
        }
        best
    }

    /// c with ‖x‖ ≥ c·|x|₂ on ℝⁿ.
    pub fn euclid_lower_factor(&self, n: usize) -> f64 {
        let nf = n as f64;
        let (p, wmin) = match self {
            NormSpec::Euclidean => return 1.0,
            NormSpec::PNorm { p } => (*p, 1.0),
            NormSpec::WeightedPNorm { p, weights } => (*p, weights.iter().cloned().fold(f64::INFINITY, f64::min)),
        };
        let base = if p <= 2.0 { 1.0 } else if p.is_infinite() { nf.powf(-0.5) } else { nf.powf(1.0 / p - 0.5) };
        let w = if p.is_infinite() { wmin } else { wmin.powf(1.0 / p) };
        base * w
    }

    /// Gradient of ‖·‖ at x, when it exists.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = self.norm(x);
        if r == 0.0 {
            return None;
        }
        let (p, w): (f64, Option<&Vec<f64>>) = match self {
            NormSpec::Euclidean => return Some(x.iter().map(|v| v / r).collect()),
            NormSpec::PNorm { p } => (*p, None),
            NormSpec::WeightedPNorm { p, weights } => (*p, Some(weights)),
        };
        let wi = |i: usize| w.map_or(1.0, |w| w[i]);
        if p.is_infinite() {
            let vals: Vec<f64> = x.iter().enumerate().map(|(i, v)| wi(i) * v.abs()).collect();
            let k = vals.iter().position(|&v| v == r)?;
            if vals.iter().filter(|&&v| v == r).count() > 1 {
                return None;
            }
            let mut g = vec![0.0; x.len()];
            g[k] = wi(k) * x[k].signum();
            Some(g)
        } else if p == 1.0 {
            if x.iter().any(|v| *v == 0.0) {
                return None;
            }
            Some(x.iter().enumerate().map(|(i, v)| wi(i) * v.signum()).collect())
        } else {
            Some(x.iter().enumerate().map(|(i, v)| wi(i) * v.signum() * (v.abs() / r).powf(p - 1.0)).collect())
        }
    }

    /// A unit vector u with u·z = ‖z‖_* (the maximiser in the dual-norm definition).
    pub fn dual_direction(&self, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let dn = self.dual(z);
        if dn == 0.0 {
            let mut u = vec![0.0; n];
            u[0] = 1.0;
            let r = self.norm(&u);
            return u.iter().map(|v| v / r).collect();
        }
        // the gradient of the dual norm at z is a maximiser
        let u = match self.dual_spec().gradient(z) {
            Some(g) => g,
            None => {
                let (p, w): (f64, Option<Vec<f64>>) = match self {
                    NormSpec::Euclidean => unreachable!(),
                    NormSpec::PNorm { p } => (*p, None),
                    NormSpec::WeightedPNorm { p, weights } => (*p, Some(weights.clone())),
                };
                let wi = |i: usize| w.as_ref().map_or(1.0, |w| w[i]);
                let mut u = vec![0.0; n];
                if p == 1.0 {
                    // dual is max |zᵢ|/wᵢ: put all mass on one coordinate
                    let k = (0..n).max_by(|&a, &b| (z[a].abs() / wi(a)).total_cmp(&(z[b].abs() / wi(b)))).unwrap();
                    u[k] = z[k].signum() / wi(k);
                } else {
                    // p = ∞: dual is Σ|zᵢ|/wᵢ, maximiser uᵢ = sign(zᵢ)/wᵢ
                    for i in 0..n {
                        u[i] = if z[i] == 0.0 { 0.0 } else { z[i].signum() / wi(i) };
                    }
                }
                u
            }
        };
        let r = self.norm(&u);
        u.iter().map(|v| v / r).collect()
    }
}

fn lp(x: &[f64], p: f64, w: Option<&Vec<f64>>) -> f64 {
    let wi = |i: usize| w.map_or(1.0, |w| w[i]);
    if p.is_infinite() {
        x.iter().enumerate().map(|(i, v)| wi(i) * v.abs()).fold(0.0, f64::max)
    } else if p == 1.0 {
        x.iter().enumerate().map(|(i, v)| wi(i) * v.abs()).sum()
    } else if p == 2.0 && w.is_none() {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let m = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        // scale by the max entry to avoid overflow
        let s: f64 = x.iter().enumerate().map(|(i, v)| wi(i) * (v.abs() / m).powf(p)).sum();
        m * s.powf(1.0 / p)
    }
}

/// k-th of `total` deterministic unit directions in ℝⁿ (Euclidean length one).
pub(crate) fn unit_direction(n: usize, k: usize, total: usize, out: &mut [f64]) {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    match n {
        1 => out[0] = if k % 2 == 0 { 1.0 } else { -1.0 },
        2 => {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / total as f64;
            out[0] = th.cos();
            out[1] = th.sin();
        }
        _ => {
            // spherical spiral in the first three coordinates, quasi-random rotation of the rest
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / total as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = 2.0 * std::f64::consts::PI * k as f64 / golden;
            out.iter_mut().for_each(|v| *v = 0.0);
            out[0] = r * th.cos();
            out[1] = r * th.sin();
            out[2] = z;
            if n > 3 {
                for (j, v) in out.iter_mut().enumerate().skip(3) {
                    *v = ((k * (j + 1)) as f64 * golden).fract() - 0.5;
                }
                let s: f64 = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                out.iter_mut().for_each(|v| *v /= s);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_examples() {
        assert!((NormSpec::Euclidean.dual(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        assert_eq!(NormSpec::PNorm { p: 1.0 }.dual(&[3.0, -4.0]), 4.0);
        let v = NormSpec::PNorm { p: 3.0 }.dual(&[1.0, 1.0]);
        assert!((v - 2f64.powf(1.0 / 1.5)).abs() < 1e-14);
        let (s, gap) = NormSpec::PNorm { p: 3.0 }.dual_sampled(&[1.0, 1.0], 20000);
        assert!(s <= v + 1e-12 && v - s < 1e-6 && gap < 1e-5, "{s} {v} {gap}");
    }

    #[test]
    fn weighted_dual_matches_sampling() {
        for p in [1.0, 1.7, 3.0, f64::INFINITY] {
            let n = NormSpec::WeightedPNorm { p, weights: vec![2.0, 0.5] };
            let y = [0.7, -1.3];
            let (s, _) = n.dual_sampled(&y, 200_000);
            let d = n.dual(&y);
            assert!(s <= d + 1e-12 && d - s < 1e-4 * d, "p={p}: {s} vs {d}");
        }
    }

    #[test]
    fn dual_direction_attains() {
        for n in [NormSpec::Euclidean, NormSpec::PNorm { p: 1.0 }, NormSpec::PNorm { p: 3.0 }, NormSpec::PNorm { p: f64::INFINITY }] {
            let z = [0.4, -1.1, 0.3];
            let u = n.dual_direction(&z);
            assert!((n.norm(&u) - 1.0).abs() < 1e-12);
            let v: f64 = u.iter().zip(&z).map(|(a, b)| a * b).sum();
            assert!((v - n.dual(&z)).abs() < 1e-12, "{n:?}");
        }
    }

    #[test]
    fn serde_forms() {
        let n: NormSpec = serde_json::from_str(r#"{"kind":"p_norm","p":"inf"}"#).unwrap();
        assert_eq!(n, NormSpec::PNorm { p: f64::INFINITY });
        let back: NormSpec = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
        assert_eq!(back, n);
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"p_norm","p":0.5}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"taxicab"}"#).is_err());
    }
}
