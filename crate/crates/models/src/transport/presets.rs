//! Canned transport and epidemic scenarios with their solver hierarchies.
//!
//! Each scenario owns the uncertain inputs (a handful of uniform
//! parameters feeding coefficient fields, initial data, or boundary
//! values), the grids of its two fidelity levels, and solve entry points
//! that return the density of interest as a spatial [`Field`]. High
//! fidelity is the resolved kinetic model; low fidelity is the two-speed
//! surrogate on a coarser grid (transport) or with a shorter relaxation
//! time (epidemic), tuned so both share the same diffusive limit.

use kinuq_core::random::{eval_kinetic_ic, eval_sigma_field, IcPreset};
use kinuq_core::{gauss_legendre, Axis, AxisKind, Field, FieldLayout, Grid1D};

use super::diffusion::diffusion_solve;
use super::gt::GtSolver;
use super::parity::ParityTransport;
use super::sir::{
    sir_diffusion_solve, sir_two_velocity_solve, SirKinetic, SirMacroState, SirParams,
};
use super::TransportBc;
use crate::error::{config, Result};

/// Wrap a cell-centered density in a one-axis field.
pub fn density_field(grid: &Grid1D, label: &str, time: f64, values: Vec<f64>) -> Result<Field> {
    let layout = FieldLayout::new(vec![Axis::from_grid(AxisKind::Space, label, grid)])?;
    Ok(Field::from_values(layout, time, values)?)
}

/// Uncertain linear-transport scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportPreset {
    /// Smooth periodic problem: five-mode random scattering field and a
    /// double-Gaussian kinetic initial condition sharing the same five
    /// parameters, mildly diffusive scaling.
    Kl,
    /// Riemann problem deep in the diffusive regime: uncertain step
    /// height, matching inflow on the left, vacuum inflow on the right.
    Riemann,
}

#[derive(Debug, Clone)]
pub struct TransportScenario {
    pub preset: TransportPreset,
    pub epsilon: f64,
    pub t_end: f64,
    pub grid_hi: Grid1D,
    pub grid_lo: Grid1D,
    pub n_nodes: usize,
    pub z_dim: usize,
}

impl TransportScenario {
    pub fn new(preset: TransportPreset) -> Self {
        match preset {
            TransportPreset::Kl => Self {
                preset,
                epsilon: 1e-2,
                t_end: 0.02,
                grid_hi: Grid1D::new(0.0, 1.0, 40).expect("static grid"),
                grid_lo: Grid1D::new(0.0, 1.0, 25).expect("static grid"),
                n_nodes: 16,
                z_dim: 5,
            },
            TransportPreset::Riemann => Self {
                preset,
                epsilon: 1e-8,
                t_end: 0.01,
                grid_hi: Grid1D::new(0.0, 1.0, 80).expect("static grid"),
                grid_lo: Grid1D::new(0.0, 1.0, 25).expect("static grid"),
                n_nodes: 16,
                z_dim: 5,
            },
        }
    }

    fn check_z(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.z_dim {
            return Err(config(format!(
                "scenario expects {} parameters, got {}",
                self.z_dim,
                z.len()
            )));
        }
        if z.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(config("parameters must lie in [-1, 1]"));
        }
        Ok(())
    }

    pub fn bc(&self, z: &[f64]) -> TransportBc {
        match self.preset {
            TransportPreset::Kl => TransportBc::Periodic,
            TransportPreset::Riemann => TransportBc::Inflow {
                left: 1.0 + 0.4 * z[0],
                right: 0.0,
            },
        }
    }

    /// Full kinetic solve; returns the half-range average density on the
    /// fine grid.
    pub fn solve_hi(&self, z: &[f64]) -> Result<Field> {
        self.check_z(z)?;
        let solver = self.parity_solver(&self.grid_hi, z)?;
        let state = match self.preset {
            TransportPreset::Kl => solver.state_from_distribution(|x, v| {
                eval_kinetic_ic(IcPreset::TransportDoubleGaussian, &[x], &[v], z)
                    .expect("parameters validated above")
            }),
            TransportPreset::Riemann => solver.isotropic_state(&self.step_ic(&self.grid_hi, z))?,
        };
        let out = solver.solve(state, self.t_end)?;
        density_field(&self.grid_hi, "x", out.time, solver.rho(&out))
    }

    /// Two-stream surrogate with tripled scattering on the coarse grid.
    pub fn solve_lo(&self, z: &[f64]) -> Result<Field> {
        self.check_z(z)?;
        let grid = self.grid_lo.clone();
        let zc = z.to_vec();
        let solver = GtSolver::matched_to_transport(
            grid.clone(),
            self.epsilon,
            move |x| eval_sigma_field(x, &zc).expect("parameters validated above"),
            self.bc(z),
        )?;
        let state = match self.preset {
            TransportPreset::Kl => {
                // Stream densities are half-range averages of the kinetic
                // initial condition, so the surrogate starts from the
                // same density and scaled flux as the full model.
                let rule = gauss_legendre(self.n_nodes)?;
                let (nodes, weights) = rule.mapped_to(0.0, 1.0);
                let half_avg = |x: f64, sign: f64| {
                    nodes
                        .iter()
                        .zip(&weights)
                        .map(|(&v, &w)| {
                            w * eval_kinetic_ic(
                                IcPreset::TransportDoubleGaussian,
                                &[x],
                                &[sign * v],
                                z,
                            )
                            .expect("parameters validated above")
                        })
                        .sum::<f64>()
                };
                solver.state_from_streams(|x| half_avg(x, 1.0), |x| half_avg(x, -1.0))
            }
            TransportPreset::Riemann => solver.isotropic_state(&self.step_ic(&grid, z))?,
        };
        let out = solver.solve(state, self.t_end)?;
        density_field(&self.grid_lo, "x", out.time, out.rho)
    }

    /// Diffusion limit of both models on a caller-chosen grid.
    pub fn solve_limit(&self, z: &[f64], grid: &Grid1D) -> Result<Field> {
        self.check_z(z)?;
        let rho0 = match self.preset {
            TransportPreset::Kl => {
                let rule = gauss_legendre(self.n_nodes)?;
                let (nodes, weights) = rule.mapped_to(0.0, 1.0);
                grid.centers()
                    .iter()
                    .map(|&x| {
                        nodes
                            .iter()
                            .zip(&weights)
                            .map(|(&v, &w)| {
                                let f = |vv: f64| {
                                    eval_kinetic_ic(
                                        IcPreset::TransportDoubleGaussian,
                                        &[x],
                                        &[vv],
                                        z,
                                    )
                                    .expect("parameters validated above")
                                };
                                w * 0.5 * (f(v) + f(-v))
                            })
                            .sum::<f64>()
                    })
                    .collect()
            }
            TransportPreset::Riemann => self.step_ic(grid, z),
        };
        let dt = self.t_end / 400.0;
        let zc = z.to_vec();
        let rho = diffusion_solve(
            grid,
            &rho0,
            move |x| 1.0 / (3.0 * eval_sigma_field(x, &zc).expect("parameters validated above")),
            self.bc(z),
            self.t_end,
            dt,
        )?;
        density_field(grid, "x", self.t_end, rho)
    }

    fn parity_solver(&self, grid: &Grid1D, z: &[f64]) -> Result<ParityTransport> {
        let zc = z.to_vec();
        ParityTransport::new(
            grid.clone(),
            self.epsilon,
            move |x| eval_sigma_field(x, &zc).expect("parameters validated above"),
            self.n_nodes,
            self.bc(z),
        )
    }

    fn step_ic(&self, grid: &Grid1D, z: &[f64]) -> Vec<f64> {
        let height = 1.0 + 0.4 * z[0];
        grid.centers()
            .iter()
            .map(|&x| if x < 0.5 { height } else { 0.0 })
            .collect()
    }
}

/// Uncertain epidemic scenarios on a periodic strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SirPreset {
    /// Fast commuting, short relaxation: both fidelities sit close to
    /// the common reaction-diffusion limit.
    Diffusive,
    /// Order-one speeds and relaxation times: genuinely hyperbolic
    /// dynamics, the limit is only a rough guide.
    Hyperbolic,
}

#[derive(Debug, Clone)]
pub struct SirScenario {
    pub preset: SirPreset,
    pub grid: Grid1D,
    pub n_velocities: usize,
    pub t_end: f64,
    pub z_dim: usize,
    /// Common commuting speed of all compartments.
    pub lambda: f64,
    /// Relaxation time of the kinetic (high-fidelity) model.
    pub tau_hi: f64,
    /// Relaxation time of the two-speed surrogate, chosen so that
    /// `lambda^2 tau_lo = lambda^2 tau_hi / 3`: the two models then share
    /// the limiting diffusivity.
    pub tau_lo: f64,
}

impl SirScenario {
    pub fn new(preset: SirPreset) -> Self {
        let grid = Grid1D::new(0.0, 20.0, 150).expect("static grid");
        let (lambda, tau_hi, tau_lo) = match preset {
            SirPreset::Diffusive => (1e5_f64.sqrt(), 3e-5, 1e-5),
            SirPreset::Hyperbolic => (1.0, 3.0, 1.0),
        };
        Self {
            preset,
            grid,
            n_velocities: 8,
            t_end: 5.0,
            z_dim: 2,
            lambda,
            tau_hi,
            tau_lo,
        }
    }

    /// Shared limiting diffusivity of the two fidelity levels.
    pub fn diffusivity(&self) -> f64 {
        self.lambda * self.lambda * self.tau_hi / 3.0
    }

    fn check_z(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.z_dim {
            return Err(config(format!(
                "scenario expects {} parameters, got {}",
                self.z_dim,
                z.len()
            )));
        }
        if z.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(config("parameters must lie in [-1, 1]"));
        }
        Ok(())
    }

    fn params(&self, z: &[f64], tau: f64) -> Result<SirParams> {
        let beta0 = 11.0 * (1.0 + 0.6 * z[0]);
        let gamma = 10.0 * (1.0 + 0.4 * z[1]);
        let ext = self.grid.extent();
        SirParams::new(
            &self.grid,
            move |x| beta0 * (1.0 + 0.05 * (13.0 * std::f64::consts::PI * x / ext).sin()),
            gamma,
            0.0,
            1.0,
            [self.lambda; 3],
            [tau; 3],
        )
    }

    pub fn params_hi(&self, z: &[f64]) -> Result<SirParams> {
        self.check_z(z)?;
        self.params(z, self.tau_hi)
    }

    pub fn params_lo(&self, z: &[f64]) -> Result<SirParams> {
        self.check_z(z)?;
        self.params(z, self.tau_lo)
    }

    /// Initial densities: a small Gaussian pocket of infection centered
    /// in the strip, everyone else susceptible, nobody recovered.
    pub fn ic_densities(&self) -> [Vec<f64>; 3] {
        let mid = 0.5 * (self.grid.x_min() + self.grid.x_max());
        let i0: Vec<f64> = self
            .grid
            .centers()
            .iter()
            .map(|&x| 0.01 * (-(x - mid) * (x - mid)).exp())
            .collect();
        let s0: Vec<f64> = i0.iter().map(|&i| 1.0 - i).collect();
        let r0 = vec![0.0; self.grid.n_cells()];
        [s0, i0, r0]
    }

    /// Kinetic solve; returns the infected density.
    pub fn solve_hi(&self, z: &[f64]) -> Result<Field> {
        let dens = self.solve_hi_densities(z)?;
        density_field(&self.grid, "x", self.t_end, dens[1].clone())
    }

    pub fn solve_hi_densities(&self, z: &[f64]) -> Result<[Vec<f64>; 3]> {
        let params = self.params_hi(z)?;
        let solver = SirKinetic::new(self.grid.clone(), params, self.n_velocities)?;
        let state = solver.gaussian_profile_state(&self.ic_densities())?;
        let out = solver.solve(state, self.t_end)?;
        Ok(solver.densities(&out))
    }

    /// Two-speed surrogate solve; returns the infected density.
    pub fn solve_lo(&self, z: &[f64]) -> Result<Field> {
        let dens = self.solve_lo_densities(z)?;
        density_field(&self.grid, "x", self.t_end, dens[1].clone())
    }

    pub fn solve_lo_densities(&self, z: &[f64]) -> Result<[Vec<f64>; 3]> {
        let params = self.params_lo(z)?;
        let state = SirMacroState::at_rest(self.ic_densities());
        let out = sir_two_velocity_solve(&self.grid, &params, state, self.t_end)?;
        Ok(out.dens)
    }

    /// Reaction-diffusion limit with the shared diffusivity.
    pub fn solve_limit(&self, z: &[f64]) -> Result<Field> {
        let params = self.params_hi(z)?;
        let d = self.diffusivity();
        let dens = sir_diffusion_solve(
            &self.grid,
            &params,
            [d; 3],
            self.ic_densities(),
            self.t_end,
        )?;
        density_field(&self.grid, "x", self.t_end, dens[1].clone())
    }
}
