//! Shared numerical foundations for the kinuq workspace: grids and
//! quadratures, phase-space fields with weighted reductions, sampling
//! statistics, Gramians with greedy pivoted Cholesky, histogram
//! reconstruction, and seeded parameter-space sampling.

pub mod error;
pub mod field;
pub mod gram;
pub mod grid;
pub mod histogram;
pub mod norms;
pub mod quadrature;
pub mod random;
pub mod stats;

pub use error::{CoreError, Result};
pub use field::{Axis, AxisKind, Field, FieldLayout};
pub use grid::Grid1D;
pub use quadrature::{gauss_legendre, VelocityQuadrature};
