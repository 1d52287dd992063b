//! A pair of lower semicontinuous convex functions on ℝ² whose infimal convolution is
//! not lower semicontinuous.
//!
//! f = 1 on [0,1]×{0}, f = 1 − x₂ on {0}×[0,1], +∞ elsewhere.
//! g = 0 on {0}×[0,1] and +∞ elsewhere (`Vertical`). This g reproduces the table
//!   1 on (0,1]×[0,1],  1 − x₂ on {0}×[0,1],  0 on {0}×[1,2],  +∞ elsewhere.
//! `Horizontal` puts the zero set of g on [0,1]×{0} instead; then f□g is
//!   1 on [0,2]×{0},  1 − x₂ on [0,1]×(0,1],  +∞ elsewhere.

use crate::error::{Error, Result};
use crate::extgrid::{ExtGridFn, GridSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleVariant {
    Vertical,
    Horizontal,
}

/// Samples the pair on [0,1]² with spacing 1/m.
pub fn counterexample_pair(m: usize, variant: CounterexampleVariant) -> Result<(ExtGridFn, ExtGridFn)> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let grid = GridSpec::cube(2, 0.0, 1.0, m + 1)?;
    let f = ExtGridFn::from_fn(grid.clone(), |x| {
        if x[1] == 0.0 {
            1.0
        } else if x[0] == 0.0 {
            1.0 - x[1]
        } else {
            f64::INFINITY
        }
    })?;
    let g = ExtGridFn::from_fn(grid, |x| {
        let on = match variant {
            CounterexampleVariant::Vertical => x[0] == 0.0,
            CounterexampleVariant::Horizontal => x[1] == 0.0,
        };
        if on {
            0.0
        } else {
            f64::INFINITY
        }
    })?;
    Ok((f, g))
}

/// Closed-form f□g at a point of [0,2]².
pub fn counterexample_expected(x: &[f64], variant: CounterexampleVariant) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let inside = |v: f64, a: f64, b: f64| v >= a && v <= b;
    match variant {
        CounterexampleVariant::Vertical => {
            if x1 == 0.0 && inside(x2, 0.0, 1.0) {
                1.0 - x2
            } else if x1 == 0.0 && inside(x2, 1.0, 2.0) {
                0.0
            } else if inside(x1, 0.0, 1.0) && x1 > 0.0 && inside(x2, 0.0, 1.0) {
                1.0
            } else {
                f64::INFINITY
            }
        }
        CounterexampleVariant::Horizontal => {
            if x2 == 0.0 && inside(x1, 0.0, 2.0) {
                1.0
            } else if inside(x1, 0.0, 1.0) && inside(x2, 0.0, 1.0) {
                1.0 - x2
            } else {
                f64::INFINITY
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopflax::infconv;

    #[test]
    fn both_variants_match_closed_form() {
        for v in [CounterexampleVariant::Vertical, CounterexampleVariant::Horizontal] {
            let (f, g) = counterexample_pair(4, v).unwrap();
            let r = infconv(&f, &g).unwrap();
            let grid = r.values.grid();
            for flat in 0..grid.len() {
                let x = grid.point_vec(flat);
                assert_eq!(r.values.values()[flat], counterexample_expected(&x, v), "{v:?} at {x:?}");
            }
        }
    }
}
