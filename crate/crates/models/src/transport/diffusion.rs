//! Variable-coefficient diffusion, the parabolic limit of the kinetic
//! transport models.
//!
//! Backward Euler in time, conservative finite volumes in space: face
//! fluxes `kappa (rho_i - rho_{i-1}) / dx` assembled into a tridiagonal
//! (cyclic for periodic boundaries) system whose column sums are one, so
//! the total mass is reproduced exactly at every step. The implicit step
//! is unconditionally stable; the step size only controls accuracy.

use kinuq_core::Grid1D;

use super::TransportBc;
use crate::error::{config, Result};

/// Integrate `d rho / dt = d/dx (kappa(x) d rho / dx)` from `rho0` to
/// `t_end` with step `dt`. With inflow boundaries the boundary value is
/// held at the prescribed density through a ghost cell, the limiting
/// behavior of the kinetic solvers' incoming-characteristic condition.
pub fn diffusion_solve(
    grid: &Grid1D,
    rho0: &[f64],
    kappa: impl Fn(f64) -> f64,
    bc: TransportBc,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    if rho0.len() != n {
        return Err(config(format!(
            "initial density has {} cells, grid has {n}",
            rho0.len()
        )));
    }
    if n < 3 {
        return Err(config("diffusion grid needs at least three cells"));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0) {
        return Err(config("diffusion time step and horizon must be positive"));
    }
    let kf: Vec<f64> = (0..=n).map(|i| kappa(grid.face(i))).collect();
    if kf.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(config("diffusivity must be positive on the grid"));
    }

    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let r = dt / (grid.spacing() * grid.spacing());

    let mut rho = rho0.to_vec();
    match bc {
        TransportBc::Periodic => {
            // Face n is face 0; both sides of the shared face must see
            // the same diffusivity or mass leaks through the seam.
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            for i in 0..n {
                let kl = kf[i];
                let kr = if i == n - 1 { kf[0] } else { kf[i + 1] };
                sub[i] = -r * kl;
                sup[i] = -r * kr;
                diag[i] = 1.0 + r * (kl + kr);
            }
            for _ in 0..steps {
                rho = cyclic_thomas(&sub, &diag, &sup, &rho)?;
            }
        }
        TransportBc::Inflow { left, right } => {
            // Ghost cells pinned to the boundary densities contribute a
            // Dirichlet-like term; the wall flux uses the same two-point
            // difference as interior faces.
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            for i in 0..n {
                sub[i] = if i == 0 { 0.0 } else { -r * kf[i] };
                sup[i] = if i == n - 1 { 0.0 } else { -r * kf[i + 1] };
                diag[i] = 1.0 + r * (kf[i] + kf[i + 1]);
            }
            for _ in 0..steps {
                let mut rhs = rho.clone();
                rhs[0] += r * kf[0] * left;
                rhs[n - 1] += r * kf[n] * right;
                rho = thomas(&sub, &diag, &sup, &rhs)?;
            }
        }
    }
    Ok(rho)
}

/// Tridiagonal solve, `sub[0]` and `sup[n-1]` ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err(config("tridiagonal pivot breakdown"));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv.abs() < 1e-300 {
            return Err(config("tridiagonal pivot breakdown"));
        }
        c[i] = sup[i] / piv;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Cyclic tridiagonal solve by the Sherman-Morrison trick: the wrap
/// entries `sub[0]` (coupling to the last cell) and `sup[n-1]` (coupling
/// to the first) are peeled off as a rank-one update of a plain
/// tridiagonal matrix.
pub(crate) fn cyclic_thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let alpha = sub[0];
    let beta = sup[n - 1];
    // Choose the rank-one scale away from zero to keep the modified
    // corners well conditioned.
    let gamma = -diag[0];
    let mut d2 = diag.to_vec();
    d2[0] -= gamma;
    d2[n - 1] -= alpha * beta / gamma;
    let y = thomas(sub, &d2, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = beta;
    let q = thomas(sub, &d2, sup, &u)?;
    let vy = y[0] + alpha / gamma * y[n - 1];
    let vq = q[0] + alpha / gamma * q[n - 1];
    let denom = 1.0 + vq;
    if denom.abs() < 1e-300 {
        return Err(config("cyclic tridiagonal breakdown"));
    }
    let factor = vy / denom;
    Ok(y.iter().zip(&q).map(|(yi, qi)| yi - factor * qi).collect())
}
