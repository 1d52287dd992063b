//! φ(h) = ∫Q_h^W(g)^{−n} on ℝⁿ and its derivative at 0 against n∫W*(∇g)/g^{n+1}.

use super::gap::GapTail;
use crate::error::{Error, Result};
use crate::extgrid::{grid_integral, ExtGridFn, GridSpec};
use crate::field::{gradient_or_fd, Cost, Field};
use crate::hopflax::hopflax_pointwise;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    /// |φ_Δ − φ_{2Δ}| per h.
    pub phi_error: Vec<f64>,
    /// Mass of Q_h^{−n} outside the box, from the growth envelopes when given.
    pub tail: Vec<f64>,
    pub phi0: f64,
    /// φ(h) ≥ 1 − error − tail for every h.
    pub phi_above_one: bool,
    pub deriv_h: f64,
    /// (φ(h) − φ(0))/h at h = deriv_h.
    pub forward_difference: f64,
    /// 2D(h/2) − D(h).
    pub richardson: f64,
    /// n∫W*(∇g)/g^{n+1}
    pub integral: f64,
    pub integral_error: f64,
    pub tolerance: f64,
    pub agrees: bool,
    pub scale_g: f64,
    pub scale_w: f64,
}

struct Scaled<'a, F: ?Sized> {
    f: &'a F,
    c: f64,
}

impl<F: Field + ?Sized> Field for Scaled<'_, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.c * self.f.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.f.gradient(x).map(|g| g.into_iter().map(|v| self.c * v).collect())
    }
}

impl<F: Cost + ?Sized> Cost for Scaled<'_, F> {
    fn conjugate(&self, z: &[f64]) -> f64 {
        let zz: Vec<f64> = z.iter().map(|v| v / self.c).collect();
        self.c * self.f.conjugate(&zz)
    }
    fn conjugate_maximiser(&self, z: &[f64]) -> Option<Vec<f64>> {
        let zz: Vec<f64> = z.iter().map(|v| v / self.c).collect();
        self.f.conjugate_maximiser(&zz)
    }
}

/// Trapezoid value on `grid` and on its every-second-node subgrid.
fn fine_coarse(grid: &GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<(f64, f64)> {
    let vals = ExtGridFn::from_fn(grid.clone(), f)?;
    let fine = grid_integral(&vals, |v| v);
    let coarse = grid_integral(&vals.subsampled(2)?, |v| v);
    Ok((fine, coarse))
}

/// Tabulates φ over `h_grid` with pointwise Hopf–Lax values on `grid` (odd resolutions),
/// after rescaling g and W so that their trapezoid integrals of ·^{−n} on `grid` are 1.
/// The tail radius must fit inside the box.
pub fn equivalence_scan(
    g: &(impl Field + ?Sized),
    w: &(impl Cost + ?Sized),
    n: usize,
    h_grid: &[f64],
    grid: &GridSpec,
    deriv_h: f64,
    tail: Option<GapTail>,
) -> Result<EquivalenceReport> {
    crate::error::check_dim(n, g.dim())?;
    crate::error::check_dim(n, w.dim())?;
    crate::error::check_dim(n, grid.dim())?;
    if grid.subsampled(2).is_err() {
        return Err(Error::InvalidArgument("equivalence_scan needs odd grid resolutions".into()));
    }
    if !(deriv_h > 0.0) || h_grid.iter().any(|h| !(*h >= 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument("h values must be nonnegative and deriv_h positive".into()));
    }
    let nf = n as f64;
    let mass = |f: &(dyn Fn(&[f64]) -> f64 + Sync)| -> Result<f64> {
        let m = grid_integral(&ExtGridFn::from_fn(grid.clone(), f)?, |v| v);
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NotNormalizable(format!("grid integral of ·^(-n) is {m}")));
        }
        Ok(m)
    };
    let cg = mass(&|x| g.value(x).powf(-nf))?.powf(1.0 / nf);
    let cw = mass(&|x| w.value(x).powf(-nf))?.powf(1.0 / nf);
    let gs = Scaled { f: g, c: cg };
    let ws = Scaled { f: w, c: cw };
    let phi_at = |h: f64| -> Result<(f64, f64)> {
        fine_coarse(grid, |x| {
            let mut y0: Vec<f64> = x.iter().map(|v| v / (1.0 + h)).collect();
            let q = if h == 0.0 {
                gs.value(x)
            } else {
                let z = vec![0.0; n];
                y0.truncate(n);
                hopflax_pointwise(&gs, &ws, h, x, &[y0, z]).0
            };
            q.powf(-nf)
        })
    };
    let (phi0, phi0_c) = phi_at(0.0)?;
    let table: Vec<(f64, f64)> = h_grid.par_iter().map(|&h| phi_at(h)).collect::<Result<_>>()?;
    let phi: Vec<f64> = table.iter().map(|t| t.0).collect();
    let phi_error: Vec<f64> = table.iter().map(|t| (t.0 - t.1).abs()).collect();
    let tails: Vec<f64> = h_grid.iter().map(|&h| tail.map_or(0.0, |t| t.q_mass(nf, n, h, cg, cw))).collect();
    let phi_above_one = (0..phi.len()).all(|i| phi[i] >= 1.0 - phi_error[i] - tails[i] - 1e-12);
    let (p1, p1c) = phi_at(deriv_h)?;
    let (p2, p2c) = phi_at(0.5 * deriv_h)?;
    let d1 = (p1 - phi0) / deriv_h;
    let d2 = (p2 - phi0) / (0.5 * deriv_h);
    let richardson = 2.0 * d2 - d1;
    let richardson_c = 2.0 * (p2c - phi0_c) / (0.5 * deriv_h) - (p1c - phi0_c) / deriv_h;
    let (integral, integral_c) = fine_coarse(grid, |x| nf * ws.conjugate(&gradient_or_fd(&gs, x)) / gs.value(x).powf(nf + 1.0))?;
    let integral_error = (integral - integral_c).abs();
    let tolerance = (0.05 * integral.abs()).max(integral_error + (richardson - richardson_c).abs());
    Ok(EquivalenceReport {
        n,
        h: h_grid.to_vec(),
        phi,
        phi_error,
        tail: tails,
        phi0,
        phi_above_one,
        deriv_h,
        forward_difference: d1,
        richardson,
        integral,
        integral_error,
        tolerance,
        agrees: (richardson - integral).abs() <= tolerance,
        scale_g: cg,
        scale_w: cw,
    })
}
