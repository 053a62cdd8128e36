//! Linear transport in a diffusive scaling, with its cheaper companions.
//!
//! The hierarchy has three rungs. [`parity`] solves the full velocity
//! problem in even-odd form on a Gauss-Legendre node set; [`gt`] is the
//! same kernel collapsed to a single velocity pair, which is the classic
//! two-stream approximation; [`diffusion`] integrates the parabolic
//! equation both of them approach as the scaling parameter vanishes.
//! [`sir`] reuses the machinery for a spatial epidemic model with
//! velocity-dependent commuting.

pub mod diffusion;
pub mod gt;
pub mod parity;
pub mod presets;
pub mod sir;

/// Spatial boundary treatment shared by the transport solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportBc {
    Periodic,
    /// Prescribed incoming state on each side. The value is what the
    /// density relaxes to at the wall in the diffusive limit; incoming
    /// characteristics of the kinetic solvers are fed the same number.
    Inflow { left: f64, right: f64 },
}
