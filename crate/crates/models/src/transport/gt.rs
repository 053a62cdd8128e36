//! Two-stream approximation of the transport equation.
//!
//! Collapsing the velocity interval to a single pair `v = +-1` leaves the
//! classic Goldstein-Taylor system: two counter-propagating streams that
//! exchange mass at the scattering rate. In even-odd variables it is the
//! parity system of [`super::parity`] with one node of weight one, so the
//! same staggered kernel integrates it; its density is the average of the
//! two streams, on the same scale as the half-range average of the full
//! model.
//!
//! The diffusive limits differ: the full model tends to a diffusivity of
//! `1/(3 sigma)` (the second moment of the flat velocity profile) while
//! the two-stream one gives `1/sigma`, its only speed being 1. The
//! [`GtSolver::matched_to_transport`] constructor triples the scattering
//! field so both land on the same parabolic equation, which is what makes
//! the pair usable as a two-fidelity hierarchy near the limit.

use kinuq_core::Grid1D;

use super::parity::{ParityState, ParityTransport};
use super::TransportBc;
use crate::error::Result;

/// Density and scaled flux of the two-stream model: `rho` at cell
/// centers, `s` at faces, `s` carrying the `1/eps` rescaling.
#[derive(Debug, Clone)]
pub struct GtState {
    pub rho: Vec<f64>,
    pub s: Vec<f64>,
    pub time: f64,
}

/// The parity kernel specialized to one velocity node.
#[derive(Debug, Clone)]
pub struct GtSolver {
    kernel: ParityTransport,
}

impl GtSolver {
    /// Two-stream solver with scattering field `sigma` as given.
    pub fn new(
        grid: Grid1D,
        epsilon: f64,
        sigma: impl Fn(f64) -> f64,
        bc: TransportBc,
    ) -> Result<Self> {
        let kernel =
            ParityTransport::with_nodes(grid, epsilon, sigma, vec![1.0], vec![1.0], bc)?;
        Ok(Self { kernel })
    }

    /// Two-stream solver whose diffusive limit matches the full velocity
    /// model with scattering `sigma`: the rate is tripled so both reach
    /// diffusivity `1/(3 sigma)`.
    pub fn matched_to_transport(
        grid: Grid1D,
        epsilon: f64,
        sigma: impl Fn(f64) -> f64,
        bc: TransportBc,
    ) -> Result<Self> {
        Self::new(grid, epsilon, move |x| 3.0 * sigma(x), bc)
    }

    pub fn grid(&self) -> &Grid1D {
        self.kernel.grid()
    }

    pub fn epsilon(&self) -> f64 {
        self.kernel.epsilon()
    }

    pub fn stable_dt(&self) -> f64 {
        self.kernel.stable_dt()
    }

    /// State with the given density and no flux.
    pub fn isotropic_state(&self, rho0: &[f64]) -> Result<GtState> {
        let s = self.kernel.isotropic_state(rho0)?;
        Ok(Self::unwrap_state(s))
    }

    /// State from separate right- and left-moving stream densities, each
    /// given as a function of `x`. The flux is sampled at faces.
    pub fn state_from_streams(
        &self,
        right: impl Fn(f64) -> f64,
        left: impl Fn(f64) -> f64,
    ) -> GtState {
        let s = self
            .kernel
            .state_from_distribution(|x, v| if v > 0.0 { right(x) } else { left(x) });
        Self::unwrap_state(s)
    }

    pub fn solve(&self, state: GtState, t_end: f64) -> Result<GtState> {
        let s = self.kernel.solve(Self::wrap_state(state), t_end)?;
        Ok(Self::unwrap_state(s))
    }

    pub fn solve_with_dt(&self, state: GtState, t_end: f64, dt: f64) -> Result<GtState> {
        let s = self.kernel.solve_with_dt(Self::wrap_state(state), t_end, dt)?;
        Ok(Self::unwrap_state(s))
    }

    fn wrap_state(state: GtState) -> ParityState {
        ParityState {
            r: vec![state.rho],
            j: vec![state.s],
            time: state.time,
        }
    }

    fn unwrap_state(mut state: ParityState) -> GtState {
        GtState {
            rho: state.r.remove(0),
            s: state.j.remove(0),
            time: state.time,
        }
    }
}
