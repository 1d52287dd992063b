//! Legendre–Fenchel transforms, dual norms and the power-cost conjugate.

mod legendre;
mod norm;

pub use legendre::{
    default_dual_box, legendre_1d, legendre_1d_brute, legendre_nd, legendre_nd_brute, Conj1d, ConjugateResult,
};
pub use norm::{conjugate_exponent, NormSpec};
pub(crate) use norm::unit_direction;

use crate::error::{Error, Result};

/// ‖y‖_* by the closed form of the dual exponent.
pub fn dual_norm(norm: &NormSpec, y: &[f64]) -> f64 {
    norm.dual(y)
}

/// Conjugate of W(x) = C‖x‖^q/q on all of ℝⁿ: C^{1−p}‖y‖_*^p/p with p = q/(q−1).
pub fn power_cost_conjugate(c: f64, q: f64, norm: &NormSpec, y: &[f64]) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("power cost needs q > 1, got {q}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("power cost needs C > 0, got {c}")));
    }
    let p = q / (q - 1.0);
    Ok(c.powf(1.0 - p) * norm.dual(y).powf(p) / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_cost_examples() {
        let e = NormSpec::Euclidean;
        assert!((power_cost_conjugate(1.0, 2.0, &e, &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((power_cost_conjugate(2.0, 2.0, &e, &[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let v = power_cost_conjugate(1.0, 3.0, &e, &[1.0, 0.0]).unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-15);
        // numeric sup over r ≥ 0 of r − r³/3
        let sup = (0..=200_000).map(|k| k as f64 * 1e-5).map(|r| r - r * r * r / 3.0).fold(f64::MIN, f64::max);
        assert!((v - sup).abs() < 1e-9);
        assert!(power_cost_conjugate(1.0, 1.0, &e, &[1.0]).is_err());
    }
}
