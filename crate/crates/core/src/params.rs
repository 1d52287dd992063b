use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponent bundle shared by the inequality checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BblParams {
    pub n: usize,
    pub a: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
}

impl BblParams {
    /// Checks n ≥ 2, a ≥ n, n > p > 1 and fills q = p/(p−1).
    pub fn new(n: usize, a: f64, p: f64) -> Result<Self> {
        let q = p / (p - 1.0);
        let out = BblParams { n, a, p, q, h: None, t: None };
        out.validate()?;
        Ok(out)
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        self.h = Some(h);
        self.validate()?;
        Ok(self)
    }

    pub fn with_t(mut self, t: f64) -> Result<Self> {
        self.t = Some(t);
        if self.h.is_none() {
            self.h = Some(h_from_t(t)?);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if self.n < 2 {
            return Err(Error::Hypothesis(format!("n >= 2 required, got n={}", self.n)));
        }
        if !(self.p > 1.0 && self.p < nf) {
            return Err(Error::Hypothesis(format!("n > p > 1 required, got n={}, p={}", self.n, self.p)));
        }
        if !(self.a >= nf) || !self.a.is_finite() {
            return Err(Error::Hypothesis(format!("a >= n required, got a={}, n={}", self.a, self.n)));
        }
        let q = self.p / (self.p - 1.0);
        if (self.q - q).abs() > 1e-12 * q {
            return Err(Error::Hypothesis(format!("q must equal p/(p-1)={q}, got {}", self.q)));
        }
        if let Some(h) = self.h {
            if !(h >= 0.0) || !h.is_finite() {
                return Err(Error::InvalidArgument(format!("h must be a finite nonnegative real, got {h}")));
            }
        }
        if let (Some(h), Some(t)) = (self.h, self.t) {
            let ht = h_from_t(t)?;
            if (ht - h).abs() > 1e-12 * (1.0 + h) {
                return Err(Error::InvalidArgument(format!("h={h} does not equal t/(1-t)={ht}")));
            }
        }
        Ok(())
    }
}

/// h = t/(1−t) for t ∈ [0, 1).
pub fn h_from_t(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t must lie in [0,1), got {t}")));
    }
    Ok(t / (1.0 - t))
}

/// Parameters of a Hopf–Lax split Q_h = Q_{h−s} ∘ Q_s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfLaxParams {
    pub h: f64,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub t: Option<f64>,
}

impl HopfLaxParams {
    pub fn new(h: f64, s: f64, t: Option<f64>) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("h must be nonnegative, got {h}")));
        }
        if !(0.0..=h).contains(&s) {
            return Err(Error::InvalidArgument(format!("s must lie in [0, h], got {s}")));
        }
        if let Some(t) = t {
            let ht = h_from_t(t)?;
            if (ht - h).abs() > 1e-12 * (1.0 + h) {
                return Err(Error::InvalidArgument(format!("h={h} does not equal t/(1-t)={ht}")));
            }
        }
        Ok(HopfLaxParams { h, s, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypotheses_are_enforced() {
        assert!(BblParams::new(2, 2.0, 1.5).is_ok());
        let e = BblParams::new(2, 2.0, 3.0).unwrap_err().to_string();
        assert!(e.contains("n > p > 1"), "{e}");
        assert!(BblParams::new(3, 2.5, 1.5).unwrap_err().to_string().contains("a >= n"));
        assert!(BblParams::new(2, 2.0, 1.0).is_err());
    }

    #[test]
    fn h_and_t_agree() {
        let p = BblParams::new(2, 2.0, 1.5).unwrap().with_t(0.2).unwrap();
        assert!((p.h.unwrap() - 0.25).abs() < 1e-15);
        assert!(BblParams::new(2, 2.0, 1.5).unwrap().with_h(0.3).unwrap().with_t(0.2).is_err());
        assert!(HopfLaxParams::new(0.25, 0.1, Some(0.2)).is_ok());
        assert!(HopfLaxParams::new(0.25, 0.3, None).is_err());
    }
}
