//! Spatial SIR dynamics driven by kinetic commuting.
//!
//! Three fidelities of the same epidemic. The full model transports a
//! kinetic density per compartment, `v` in `[-1, 1]` at compartment speed
//! `lambda_c`, relaxing toward isotropy at rate `1/tau_c`; its diffusion
//! limit has `D_c = lambda_c^2 tau_c / 3`. The cheap surrogate keeps only
//! the density and its first moment per compartment (a two-speed
//! closure), whose limit is `D_c = lambda_c^2 tau_c`; the hierarchy pairs
//! parameter sets that share the limiting diffusivity. The third rung is
//! that reaction-diffusion limit itself.
//!
//! All solvers share the incidence nonlinearity and periodic boundaries,
//! and use the same staggered semi-implicit pattern as the linear
//! transport kernel: densities at centers advanced explicitly, fluxes at
//! faces with the stiff terms implicit.

use kinuq_core::quadrature::gauss_legendre;
use kinuq_core::Grid1D;

use super::diffusion::cyclic_thomas;
use crate::error::{config, Result};

/// Incidence `beta g I^p / (1 + kappa I)`: the transmission pressure a
/// population slice `g` feels from infected density `i_dens`. Linear in
/// `g`, so it applies unchanged to densities, fluxes, and kinetic nodes.
pub fn incidence(g: f64, i_dens: f64, beta: f64, kappa: f64, p: f64) -> f64 {
    let i = i_dens.max(0.0);
    beta * g * i.powf(p) / (1.0 + kappa * i)
}

/// Reaction and transport coefficients for one SIR scenario.
/// Compartments are indexed S = 0, I = 1, R = 2 throughout.
#[derive(Debug, Clone)]
pub struct SirParams {
    /// Transmission rate at cell centers.
    pub beta_c: Vec<f64>,
    /// Transmission rate at cell faces.
    pub beta_f: Vec<f64>,
    /// Recovery rate.
    pub gamma: f64,
    /// Incidence saturation constant.
    pub kappa: f64,
    /// Incidence exponent.
    pub p: f64,
    /// Commuting speed per compartment.
    pub lambda: [f64; 3],
    /// Relaxation time per compartment.
    pub tau: [f64; 3],
}

impl SirParams {
    pub fn new(
        grid: &Grid1D,
        beta: impl Fn(f64) -> f64,
        gamma: f64,
        kappa: f64,
        p: f64,
        lambda: [f64; 3],
        tau: [f64; 3],
    ) -> Result<Self> {
        let n = grid.n_cells();
        let beta_c: Vec<f64> = grid.centers().iter().map(|&x| beta(x)).collect();
        let beta_f: Vec<f64> = (0..=n).map(|i| beta(grid.face(i))).collect();
        if beta_c.iter().chain(&beta_f).any(|&b| !(b >= 0.0 && b.is_finite())) {
            return Err(config("transmission rate must be nonnegative"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(config("recovery rate must be nonnegative"));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(config("incidence saturation must be nonnegative"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(config("incidence exponent must be at least 1"));
        }
        if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite()))
            || tau.iter().any(|&t| !(t > 0.0 && t.is_finite()))
        {
            return Err(config("speeds and relaxation times must be positive"));
        }
        Ok(Self {
            beta_c,
            beta_f,
            gamma,
            kappa,
            p,
            lambda,
            tau,
        })
    }

    /// Step bound that keeps the explicit reaction terms accurate and
    /// monotone: a tenth of the fastest reaction timescale.
    pub fn rate_cap(&self) -> f64 {
        let beta_max = self.beta_c.iter().cloned().fold(0.0, f64::max);
        let rate = beta_max.max(self.gamma);
        if rate > 0.0 {
            0.1 / rate
        } else {
            f64::INFINITY
        }
    }
}

/// Basic reproduction number of the current state: total incidence over
/// total recovery. Undefined when nobody is infected.
pub fn reproduction_number(
    grid: &Grid1D,
    s: &[f64],
    i: &[f64],
    params: &SirParams,
) -> Result<f64> {
    let n = grid.n_cells();
    if s.len() != n || i.len() != n {
        return Err(config("compartment fields do not match the grid"));
    }
    let dx = grid.spacing();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..n {
        num += incidence(s[k], i[k], params.beta_c[k], params.kappa, params.p) * dx;
        den += params.gamma * i[k].max(0.0) * dx;
    }
    if den <= 0.0 {
        return Err(config(
            "reproduction number is undefined with no infected population",
        ));
    }
    Ok(num / den)
}

/// Densities at cell centers and scaled fluxes at faces for the
/// two-speed closure, `[S, I, R]` each.
#[derive(Debug, Clone)]
pub struct SirMacroState {
    pub dens: [Vec<f64>; 3],
    pub flux: [Vec<f64>; 3],
    pub time: f64,
}

impl SirMacroState {
    /// State with the given densities and no initial flux.
    pub fn at_rest(dens: [Vec<f64>; 3]) -> Self {
        let n = dens[0].len();
        Self {
            dens,
            flux: [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]],
            time: 0.0,
        }
    }
}

/// Largest stable step shared by the macroscopic and kinetic SIR
/// schemes, for a compartment moving at speed `v` with relaxation time
/// `tau`: the better of the parabolic and hyperbolic branches of the
/// staggered scheme's stability bound.
fn telegraph_dt(dx: f64, v: f64, tau: f64) -> f64 {
    let parabolic = dx * dx / (8.0 * v * v * tau);
    let hyperbolic = dx / (2.0 * v);
    parabolic.max(hyperbolic)
}

/// Advance the two-speed closure to `t_end` on a periodic domain.
///
/// Per step: densities take explicit reactions and explicit flux
/// divergences; fluxes then take the new density gradients with the
/// relaxation (and the recovery drain on the infected flux) implicit.
/// The cross-compartment flux sources carry the speed ratios that make
/// the closure consistent with the kinetic first moments.
pub fn sir_two_velocity_solve(
    grid: &Grid1D,
    params: &SirParams,
    state: SirMacroState,
    t_end: f64,
) -> Result<SirMacroState> {
    let dt = sir_two_velocity_stable_dt(grid, params);
    sir_two_velocity_solve_with_dt(grid, params, state, t_end, dt)
}

/// Stability-derived default step of [`sir_two_velocity_solve`].
pub fn sir_two_velocity_stable_dt(grid: &Grid1D, params: &SirParams) -> f64 {
    let dx = grid.spacing();
    (0..3)
        .map(|c| telegraph_dt(dx, params.lambda[c], params.tau[c]))
        .fold(f64::INFINITY, f64::min)
        .min(params.rate_cap())
        * 0.8
}

/// Same solve with a caller-chosen step, refused above the stability
/// bound.
pub fn sir_two_velocity_solve_with_dt(
    grid: &Grid1D,
    params: &SirParams,
    mut state: SirMacroState,
    t_end: f64,
    dt_max: f64,
) -> Result<SirMacroState> {
    let n = grid.n_cells();
    check_macro_state(&state, n)?;
    let dx = grid.spacing();
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(config("time step must be positive"));
    }
    if dt_max > sir_two_velocity_stable_dt(grid, params) * 1.0000001 {
        return Err(config("time step exceeds the stability bound"));
    }
    let span = t_end - state.time;
    if span < 0.0 {
        return Err(config("t_end lies before the state's current time"));
    }
    if span == 0.0 {
        return Ok(state);
    }
    let steps = (span / dt_max).ceil().max(1.0) as usize;
    let dt = span / steps as f64;

    let [lam_s, lam_i, lam_r] = params.lambda;
    for _ in 0..steps {
        let i_dens = state.dens[1].clone();

        // Fluxes first: current density gradients, implicit relaxation
        // (recovery implicit on the infected one), explicit reactions at
        // faces with neighbor-averaged reactive fields. Updating the
        // fluxes before the densities keeps the density update driven by
        // post-relaxation fluxes, which is what makes the scheme degrade
        // gracefully when tau is far below the step size.
        let mut new_flux = state.flux.clone();
        for f in 0..=n {
            let (kl, kr) = face_neighbors(f, n);
            let grad = |d: &Vec<f64>| (d[kr] - d[kl]) / dx;
            let i_face = 0.5 * (i_dens[kl] + i_dens[kr]);
            let js = state.flux[0][f];
            let ji = state.flux[1][f];
            let f_flux = incidence(js, i_face, params.beta_f[f], params.kappa, params.p);

            new_flux[0][f] = (js - dt * (lam_s * lam_s * grad(&state.dens[0]) + f_flux))
                / (1.0 + dt / params.tau[0]);
            new_flux[1][f] = (ji
                - dt * (lam_i * lam_i * grad(&state.dens[1]) - (lam_i / lam_s) * f_flux))
                / (1.0 + dt / params.tau[1] + dt * params.gamma);
            new_flux[2][f] = (state.flux[2][f]
                - dt * (lam_r * lam_r * grad(&state.dens[2]) - (lam_r / lam_i) * params.gamma * ji))
                / (1.0 + dt / params.tau[2]);
        }
        for c in 0..3 {
            new_flux[c][n] = new_flux[c][0];
        }
        state.flux = new_flux;

        // Densities: reactions at centers, conservative differences of
        // the fresh fluxes.
        let s = state.dens[0].clone();
        for k in 0..n {
            let f_si = incidence(s[k], i_dens[k], params.beta_c[k], params.kappa, params.p);
            let rec = params.gamma * i_dens[k];
            let div = |flux: &Vec<f64>| (flux[k + 1] - flux[k]) / dx;
            state.dens[0][k] -= dt * (f_si + div(&state.flux[0]));
            state.dens[1][k] += dt * (f_si - rec - div(&state.flux[1]));
            state.dens[2][k] += dt * (rec - div(&state.flux[2]));
        }
        state.time += dt;
    }
    Ok(state)
}

/// Kinetic compartment densities in even-odd form: `r[c][k]` at centers,
/// `q[c][k]` at faces, for the positive velocity nodes `k` of a
/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct SirKineticState {
    pub r: [Vec<Vec<f64>>; 3],
    pub q: [Vec<Vec<f64>>; 3],
    pub time: f64,
}

/// Kinetic SIR solver: per-compartment transport at speed
/// `lambda_c * v`, shared incidence coupling, BGK-style isotropization.
#[derive(Debug, Clone)]
pub struct SirKinetic {
    grid: Grid1D,
    params: SirParams,
    /// Positive velocity nodes; the full rule is their symmetric closure.
    nodes: Vec<f64>,
    /// Weights of the positive nodes, summing to one.
    weights: Vec<f64>,
}

impl SirKinetic {
    /// Solver with an `n_velocities`-node Gauss-Legendre rule (even, so
    /// the nodes split into symmetric pairs and no node sits at 0).
    pub fn new(grid: Grid1D, params: SirParams, n_velocities: usize) -> Result<Self> {
        if n_velocities < 2 || n_velocities % 2 != 0 {
            return Err(config("kinetic SIR needs an even velocity count"));
        }
        if grid.n_cells() < 2 {
            return Err(config("kinetic SIR grid needs at least two cells"));
        }
        if params.beta_c.len() != grid.n_cells() {
            return Err(config("params were built for a different grid"));
        }
        let rule = gauss_legendre(n_velocities)?;
        let half = n_velocities / 2;
        let nodes: Vec<f64> = rule.nodes()[half..].to_vec();
        // The full rule's weights sum to 2, so the positive half sums to
        // one and densities are recovered as `sum_k 2 w_k r_k`.
        let weights: Vec<f64> = rule.weights()[half..].to_vec();
        Ok(Self {
            grid,
            params,
            nodes,
            weights,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// State whose velocity profile is the truncated Gaussian
    /// `exp(-v^2/2)`, renormalized on the quadrature so each cell's
    /// velocity integral reproduces the requested density exactly; the
    /// odd parts start at zero.
    pub fn gaussian_profile_state(&self, dens: &[Vec<f64>; 3]) -> Result<SirKineticState> {
        let n = self.grid.n_cells();
        if dens.iter().any(|d| d.len() != n) {
            return Err(config("initial densities do not match the grid"));
        }
        let shape: Vec<f64> = self.nodes.iter().map(|&z| (-0.5 * z * z).exp()).collect();
        let norm: f64 = 2.0 * self.weights.iter().zip(&shape).map(|(w, s)| w * s).sum::<f64>();
        let mut r: [Vec<Vec<f64>>; 3] = Default::default();
        let mut q: [Vec<Vec<f64>>; 3] = Default::default();
        for c in 0..3 {
            r[c] = self
                .nodes
                .iter()
                .enumerate()
                .map(|(k, _)| dens[c].iter().map(|&d| d * shape[k] / norm).collect())
                .collect();
            q[c] = vec![vec![0.0; n + 1]; self.nodes.len()];
        }
        Ok(SirKineticState { r, q, time: 0.0 })
    }

    /// Velocity integrals of the even parts: the compartment densities.
    pub fn densities(&self, state: &SirKineticState) -> [Vec<f64>; 3] {
        let n = self.grid.n_cells();
        let mut out: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for c in 0..3 {
            for (w, rk) in self.weights.iter().zip(&state.r[c]) {
                for (o, &v) in out[c].iter_mut().zip(rk) {
                    *o += 2.0 * w * v;
                }
            }
        }
        out
    }

    /// Compartment fluxes `lambda_c * integral of v f dv`, at faces.
    pub fn fluxes(&self, state: &SirKineticState) -> [Vec<f64>; 3] {
        let n = self.grid.n_cells();
        let mut out: [Vec<f64>; 3] = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
        for c in 0..3 {
            for ((w, z), qk) in self.weights.iter().zip(&self.nodes).zip(&state.q[c]) {
                for (o, &v) in out[c].iter_mut().zip(qk) {
                    *o += 2.0 * w * z * self.params.lambda[c] * v;
                }
            }
        }
        out
    }

    pub fn stable_dt(&self) -> f64 {
        let dx = self.grid.spacing();
        let z_max = self.nodes.iter().cloned().fold(0.0, f64::max);
        (0..3)
            .map(|c| telegraph_dt(dx, self.params.lambda[c] * z_max, self.params.tau[c]))
            .fold(f64::INFINITY, f64::min)
            .min(self.params.rate_cap())
            * 0.8
    }

    /// Advance to `t_end` on the periodic domain.
    pub fn solve(&self, state: SirKineticState, t_end: f64) -> Result<SirKineticState> {
        self.solve_with_dt(state, t_end, self.stable_dt())
    }

    /// Advance with a caller-chosen step, refused above the stability
    /// bound.
    pub fn solve_with_dt(
        &self,
        mut state: SirKineticState,
        t_end: f64,
        dt_max: f64,
    ) -> Result<SirKineticState> {
        let n = self.grid.n_cells();
        let nk = self.nodes.len();
        for c in 0..3 {
            if state.r[c].len() != nk
                || state.q[c].len() != nk
                || state.r[c].iter().any(|v| v.len() != n)
                || state.q[c].iter().any(|v| v.len() != n + 1)
            {
                return Err(config("kinetic state sizes do not match the solver"));
            }
        }
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(config("time step must be positive"));
        }
        if dt_max > self.stable_dt() * 1.0000001 {
            return Err(config("time step exceeds the stability bound"));
        }
        let span = t_end - state.time;
        if span < 0.0 {
            return Err(config("t_end lies before the state's current time"));
        }
        if span == 0.0 {
            return Ok(state);
        }
        let steps = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            self.step(&mut state, dt);
        }
        Ok(state)
    }

    fn step(&self, state: &mut SirKineticState, dt: f64) {
        let n = self.grid.n_cells();
        let dx = self.grid.spacing();
        let p = &self.params;
        let i_dens = {
            let d = self.densities(state);
            d[1].clone()
        };

        // Odd parts first: current even gradients, explicit reactions at
        // faces, implicit relaxation (recovery implicit on the infected
        // one). As in the linear kernel, the even parts must only see
        // post-relaxation odd parts or the scheme loses the diffusion
        // limit when tau is far below the step size.
        let old_q = state.q.clone();
        for (k, &z) in self.nodes.iter().enumerate() {
            for f in 0..=n {
                let (kl, kr) = face_neighbors(f, n);
                let i_face = 0.5 * (i_dens[kl] + i_dens[kr]);
                let inc = incidence(old_q[0][k][f], i_face, p.beta_f[f], p.kappa, p.p);
                let rec_src = p.gamma * old_q[1][k][f];
                for c in 0..3 {
                    let grad = (state.r[c][k][kr] - state.r[c][k][kl]) / dx;
                    let react = [-inc, inc, rec_src][c];
                    let extra = if c == 1 { dt * p.gamma } else { 0.0 };
                    state.q[c][k][f] = (old_q[c][k][f]
                        + dt * (react - p.lambda[c] * z * grad))
                        / (1.0 + dt / p.tau[c] + extra);
                }
            }
            for c in 0..3 {
                state.q[c][k][n] = state.q[c][k][0];
            }
        }

        // Even parts: explicit fresh-flux divergence and reactions, then
        // implicit relaxation toward half the post-update density, which
        // the relaxation itself conserves.
        let old_r = state.r.clone();
        let mut star: [Vec<Vec<f64>>; 3] = Default::default();
        for c in 0..3 {
            star[c] = vec![vec![0.0; n]; self.nodes.len()];
        }
        for (k, &z) in self.nodes.iter().enumerate() {
            for cell in 0..n {
                let inc = incidence(
                    old_r[0][k][cell],
                    i_dens[cell],
                    p.beta_c[cell],
                    p.kappa,
                    p.p,
                );
                let rec = p.gamma * old_r[1][k][cell];
                let react = [-inc, inc - rec, rec];
                for c in 0..3 {
                    let q = &state.q[c][k];
                    let adv = p.lambda[c] * z * (q[cell + 1] - q[cell]) / dx;
                    star[c][k][cell] = old_r[c][k][cell] + dt * (react[c] - adv);
                }
            }
        }
        for c in 0..3 {
            let mut dens_star = vec![0.0; n];
            for (w, rk) in self.weights.iter().zip(&star[c]) {
                for (d, &v) in dens_star.iter_mut().zip(rk) {
                    *d += 2.0 * w * v;
                }
            }
            let theta = dt / p.tau[c];
            for k in 0..self.nodes.len() {
                for cell in 0..n {
                    state.r[c][k][cell] =
                        (star[c][k][cell] + theta * 0.5 * dens_star[cell]) / (1.0 + theta);
                }
            }
        }
        state.time += dt;
    }
}

/// Reaction-diffusion limit: explicit reactions, implicit diffusion with
/// constant per-compartment diffusivity `d`, periodic domain.
pub fn sir_diffusion_solve(
    grid: &Grid1D,
    params: &SirParams,
    d: [f64; 3],
    dens: [Vec<f64>; 3],
    t_end: f64,
) -> Result<[Vec<f64>; 3]> {
    // Implicit diffusion is unconditionally stable; the explicit
    // reactions set the step, with a parabolic-scale cap for accuracy.
    let dx = grid.spacing();
    let d_max = d.iter().cloned().fold(0.0, f64::max);
    let dt = params.rate_cap().min(dx * dx / (2.0 * d_max)).max(1e-12);
    sir_diffusion_solve_with_dt(grid, params, d, dens, t_end, dt)
}

/// Same solve with a caller-chosen step, refused when it outruns the
/// explicit reactions.
pub fn sir_diffusion_solve_with_dt(
    grid: &Grid1D,
    params: &SirParams,
    d: [f64; 3],
    mut dens: [Vec<f64>; 3],
    t_end: f64,
    dt_max: f64,
) -> Result<[Vec<f64>; 3]> {
    let n = grid.n_cells();
    if dens.iter().any(|v| v.len() != n) {
        return Err(config("initial densities do not match the grid"));
    }
    if n < 3 {
        return Err(config("diffusion grid needs at least three cells"));
    }
    if d.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(config("diffusivities must be nonnegative"));
    }
    let dx = grid.spacing();
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(config("time step must be positive"));
    }
    if dt_max > params.rate_cap() * 1.0000001 {
        return Err(config("time step outruns the explicit reactions"));
    }
    let span = t_end;
    if span < 0.0 {
        return Err(config("t_end must be nonnegative"));
    }
    if span == 0.0 {
        return Ok(dens);
    }
    let steps = (span / dt_max).ceil().max(1.0) as usize;
    let dt = span / steps as f64;

    let systems: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = d
        .iter()
        .map(|&dc| {
            let r = dt * dc / (dx * dx);
            (
                vec![-r; n],
                vec![1.0 + 2.0 * r; n],
                vec![-r; n],
            )
        })
        .collect();

    for _ in 0..steps {
        let s_old = dens[0].clone();
        let i_old = dens[1].clone();
        for k in 0..n {
            let inc = incidence(s_old[k], i_old[k], params.beta_c[k], params.kappa, params.p);
            let rec = params.gamma * i_old[k];
            dens[0][k] -= dt * inc;
            dens[1][k] += dt * (inc - rec);
            dens[2][k] += dt * rec;
        }
        for c in 0..3 {
            let (sub, diag, sup) = &systems[c];
            dens[c] = cyclic_thomas(sub, diag, sup, &dens[c])?;
        }
    }
    Ok(dens)
}

fn check_macro_state(state: &SirMacroState, n: usize) -> Result<()> {
    if state.dens.iter().any(|v| v.len() != n) || state.flux.iter().any(|v| v.len() != n + 1) {
        return Err(config("state field sizes do not match the grid"));
    }
    Ok(())
}

/// Cells adjacent to face `f` on a periodic grid of `n` cells; faces `0`
/// and `n` are the same seam.
fn face_neighbors(f: usize, n: usize) -> (usize, usize) {
    if f == 0 || f == n {
        (n - 1, 0)
    } else {
        (f - 1, f)
    }
}
