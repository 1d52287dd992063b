//! Pointwise function interface shared by analytic fixtures and interpolated grids.

use crate::extgrid::ExtGridFn;

/// A function ℝⁿ → ℝ ∪ {+∞}, optionally with an analytic gradient.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// A cost W together with its convex conjugate W*.
pub trait Cost: Field {
    fn conjugate(&self, z: &[f64]) -> f64;
    /// A maximiser of y·z − W(y), when known in closed form.
    fn conjugate_maximiser(&self, _z: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
}

impl<T: Cost + ?Sized> Cost for &T {
    fn conjugate(&self, z: &[f64]) -> f64 {
        (**self).conjugate(z)
    }
    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        (**self).conjugate_maximiser(z)
    }
}

impl<T: Field + ?Sized> Field for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
}

impl<T: Cost + ?Sized> Cost for Box<T> {
    fn conjugate(&self, z: &[f64]) -> f64 {
        (**self).conjugate(z)
    }
    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        (**self).conjugate_maximiser(z)
    }
}

/// Central differences with a fixed step.
pub fn gradient_fd(f: &(impl Field + ?Sized), x: &[f64], step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + step;
            let fp = f.value(&y);
            y[k] = x[k] - step;
            let fm = f.value(&y);
            y[k] = x[k];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Analytic gradient when available, else central differences with step 1e-6·(1+|x|).
pub fn gradient_or_fd(f: &(impl Field + ?Sized), x: &[f64]) -> Vec<f64> {
    f.gradient(x).unwrap_or_else(|| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        gradient_fd(f, x, 1e-6 * (1.0 + r))
    })
}

/// Multilinear interpolant of a grid function; `outside` is returned off the box.
#[derive(Debug, Clone)]
pub struct GridField {
    pub f: ExtGridFn,
    pub outside: f64,
}

impl GridField {
    pub fn new(f: ExtGridFn) -> Self {
        GridField { f, outside: f64::INFINITY }
    }

    pub fn with_outside(f: ExtGridFn, outside: f64) -> Self {
        GridField { f, outside }
    }

    fn inside(&self, x: &[f64]) -> bool {
        let g = self.f.grid();
        x.iter().enumerate().all(|(d, &c)| {
            let t = g.frac_index(d, c);
            t >= 0.0 && t <= (g.res[d] - 1) as f64
        })
    }
}

impl Field for GridField {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.inside(x) {
            self.f.interpolate(x)
        } else {
            self.outside
        }
    }

    /// Central differences of the interpolant with the grid step, one-sided where a
    /// neighbour is infinite.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let v0 = self.value(x);
        if !v0.is_finite() {
            return None;
        }
        let g = self.f.grid();
        let mut y = x.to_vec();
        let mut out = vec![0.0; x.len()];
        for d in 0..x.len() {
            let h = g.step(d);
            if h == 0.0 {
                continue;
            }
            y[d] = x[d] + h;
            let fp = self.value(&y);
            y[d] = x[d] - h;
            let fm = self.value(&y);
            y[d] = x[d];
            out[d] = match (fm.is_finite(), fp.is_finite()) {
                (true, true) => (fp - fm) / (2.0 * h),
                (false, true) => (fp - v0) / h,
                (true, false) => (v0 - fm) / h,
                (false, false) => return None,
            };
        }
        Some(out)
    }
}
