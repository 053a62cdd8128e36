//! Compressible Euler solver in one dimension with gamma = 3, the monatomic
//! closure consistent with a single velocity dimension. Finite volumes with
//! the Rusanov flux; conserved variables are (rho, rho u, E).

use std::sync::Arc;

use kinuq_core::field::{Axis, AxisKind, Field, FieldLayout};
use kinuq_core::Grid1D;

use crate::error::{config, ModelError, Result};
use crate::gas::bgk1d::Boundary1D;
use crate::gas::MomentSet;

pub const GAMMA: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct Euler1dSolver {
    grid: Grid1D,
    boundary: Boundary1D,
    space_layout: Arc<FieldLayout>,
}

/// Cell states as conserved vectors (rho, rho u, E).
#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    pub cells: Vec<[f64; 3]>,
    pub time: f64,
}

fn pressure(u: &[f64; 3]) -> f64 {
    (GAMMA - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
}

fn flux(u: &[f64; 3]) -> [f64; 3] {
    let vel = u[1] / u[0];
    let p = pressure(u);
    [u[1], u[1] * vel + p, (u[2] + p) * vel]
}

fn wave_speed(u: &[f64; 3]) -> f64 {
    let vel = u[1] / u[0];
    vel.abs() + (GAMMA * pressure(u) / u[0]).sqrt()
}

impl Euler1dSolver {
    pub fn new(grid: Grid1D, boundary: Boundary1D) -> Self {
        let space_layout = FieldLayout::new(vec![Axis::from_grid(AxisKind::Space, "x", &grid)])
            .expect("single space axis is always valid");
        Self {
            grid,
            boundary,
            space_layout,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn space_layout(&self) -> &Arc<FieldLayout> {
        &self.space_layout
    }

    /// Build a state from primitive fields `(rho, u, T)` sampled at cell
    /// centers; rejects nonpositive density or temperature.
    pub fn state_from_primitive(
        &self,
        prim: impl Fn(f64) -> (f64, f64, f64),
    ) -> Result<EulerState> {
        let cells = self
            .grid
            .centers()
            .into_iter()
            .map(|x| {
                let (rho, u, t) = prim(x);
                if !(rho > 0.0) || !(t > 0.0) {
                    return Err(ModelError::DegenerateState(format!(
                        "need rho, T > 0 at x = {x}, got rho = {rho}, T = {t}"
                    )));
                }
                let m = MomentSet::from_primitive(rho, vec![u], t);
                Ok([m.rho, m.rho * m.u[0], m.energy])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EulerState { cells, time: 0.0 })
    }

    /// March to `t_end` with dynamically chosen stable steps.
    pub fn solve(&self, ic: &EulerState, t_end: f64) -> Result<EulerState> {
        if ic.cells.len() != self.grid.n_cells() {
            return Err(config("state size does not match the grid"));
        }
        if !(t_end >= 0.0) {
            return Err(config("final time must be nonnegative"));
        }
        let dx = self.grid.spacing();
        let n = ic.cells.len();
        let mut u = ic.cells.clone();
        let mut t = 0.0;
        while t < t_end - 1e-14 {
            let amax = u.iter().map(wave_speed).fold(0.0_f64, f64::max);
            if !amax.is_finite() || amax <= 0.0 {
                return Err(ModelError::SolverFailure(format!(
                    "non-finite wave speed at t = {t}"
                )));
            }
            let dt = (0.9 * dx / amax).min(t_end - t);
            let at = |i: isize| -> [f64; 3] {
                let ii = match self.boundary {
                    Boundary1D::Periodic => i.rem_euclid(n as isize) as usize,
                    Boundary1D::Outflow => i.clamp(0, n as isize - 1) as usize,
                };
                u[ii]
            };
            // Rusanov interface flux at i+1/2.
            let iface = |i: isize| -> [f64; 3] {
                let (l, r) = (at(i), at(i + 1));
                let (fl, fr) = (flux(&l), flux(&r));
                let a = wave_speed(&l).max(wave_speed(&r));
                [
                    0.5 * (fl[0] + fr[0]) - 0.5 * a * (r[0] - l[0]),
                    0.5 * (fl[1] + fr[1]) - 0.5 * a * (r[1] - l[1]),
                    0.5 * (fl[2] + fr[2]) - 0.5 * a * (r[2] - l[2]),
                ]
            };
            let mut next = vec![[0.0; 3]; n];
            for (i, cell) in next.iter_mut().enumerate() {
                let ii = i as isize;
                let (fp, fm) = (iface(ii), iface(ii - 1));
                for k in 0..3 {
                    cell[k] = u[i][k] - dt / dx * (fp[k] - fm[k]);
                }
                if !(cell[0] > 0.0) || !(pressure(cell) > 0.0) {
                    return Err(ModelError::SolverFailure(format!(
                        "vacuum or negative pressure in cell {i} at t = {}",
                        t + dt
                    )));
                }
            }
            u = next;
            t += dt;
        }
        Ok(EulerState {
            cells: u,
            time: ic.time + t_end,
        })
    }

    /// Per-cell moments of a state.
    pub fn moments(&self, state: &EulerState) -> Vec<MomentSet> {
        state
            .cells
            .iter()
            .map(|c| MomentSet::new(c[0], vec![c[1] / c[0]], c[2]))
            .collect()
    }

    /// Temperature as a field on the space layout.
    pub fn temperature_field(&self, state: &EulerState) -> Field {
        let values = self
            .moments(state)
            .iter()
            .map(MomentSet::temperature)
            .collect();
        Field::from_values(self.space_layout.clone(), state.time, values)
            .expect("layout matches by construction")
    }

    /// Density as a field on the space layout.
    pub fn density_field(&self, state: &EulerState) -> Field {
        let values = state.cells.iter().map(|c| c[0]).collect();
        Field::from_values(self.space_layout.clone(), state.time, values)
            .expect("layout matches by construction")
    }
}

/// The Sod tube primitive data with uncertain temperatures.
pub fn sod_primitive(z: f64) -> impl Fn(f64) -> (f64, f64, f64) {
    move |x| {
        if x < 0.5 {
            (1.0, 0.0, 1.0 + 0.25 * z)
        } else {
            (0.125, 0.0, 0.8 + 0.25 * z)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn totals(cells: &[[f64; 3]]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for c in cells {
            for k in 0..3 {
                s[k] += c[k];
            }
        }
        s
    }

    #[test]
    fn constant_state_stays_constant() {
        let grid = Grid1D::new(0.0, 1.0, 50).unwrap();
        let s = Euler1dSolver::new(grid, Boundary1D::Periodic);
        let ic = s.state_from_primitive(|_| (0.7, 0.3, 1.2)).unwrap();
        let out = s.solve(&ic, 0.5).unwrap();
        for (a, b) in out.cells.iter().zip(&ic.cells) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn smooth_periodic_flow_conserves_the_invariants() {
        let grid = Grid1D::new(0.0, 1.0, 64).unwrap();
        let s = Euler1dSolver::new(grid, Boundary1D::Periodic);
        let ic = s
            .state_from_primitive(|x| {
                (
                    1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin(),
                    0.1,
                    1.0,
                )
            })
            .unwrap();
        let t0 = totals(&ic.cells);
        let out = s.solve(&ic, 0.3).unwrap();
        let t1 = totals(&out.cells);
        for k in 0..3 {
            assert!(
                (t1[k] - t0[k]).abs() <= 1e-12 * t0[k].abs().max(1.0),
                "component {k}: {} vs {}",
                t0[k],
                t1[k]
            );
        }
    }

    #[test]
    fn sod_tube_keeps_mass_before_waves_reach_the_ends() {
        let grid = Grid1D::new(0.0, 1.0, 100).unwrap();
        let s = Euler1dSolver::new(grid, Boundary1D::Outflow);
        let ic = s.state_from_primitive(sod_primitive(0.0)).unwrap();
        let t0 = totals(&ic.cells);
        let out = s.solve(&ic, 0.1).unwrap();
        let t1 = totals(&out.cells);
        assert!((t1[0] - t0[0]).abs() < 1e-12 * t0[0]);
        // Density stays bracketed by the initial states and develops the
        // expansion-contact-shock ordering: monotone decrease overall.
        let rho: Vec<f64> = out.cells.iter().map(|c| c[0]).collect();
        assert!(rho.iter().all(|&r| r > 0.1249 && r < 1.0001));
        assert!(rho.first().unwrap() > &0.99);
        assert!(rho.last().unwrap() < &0.126);
    }

    #[test]
    fn mirror_symmetry_is_preserved() {
        let grid = Grid1D::new(0.0, 1.0, 80).unwrap();
        let s = Euler1dSolver::new(grid, Boundary1D::Periodic);
        let ic = s
            .state_from_primitive(|x| {
                let bump = (-(x - 0.5) * (x - 0.5) / 0.01).exp();
                (1.0 + 0.3 * bump, 0.0, 1.0 + 0.1 * bump)
            })
            .unwrap();
        let out = s.solve(&ic, 0.12).unwrap();
        let n = out.cells.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert!((out.cells[i][0] - out.cells[j][0]).abs() < 1e-10);
            assert!((out.cells[i][1] + out.cells[j][1]).abs() < 1e-10);
            assert!((out.cells[i][2] - out.cells[j][2]).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_input_is_rejected() {
        let grid = Grid1D::new(0.0, 1.0, 10).unwrap();
        let s = Euler1dSolver::new(grid, Boundary1D::Periodic);
        assert!(s.state_from_primitive(|x| (x - 0.5, 0.0, 1.0)).is_err());
    }
}
