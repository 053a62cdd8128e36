//! Solver hierarchies paired as high/low fidelity models: rarefied-gas
//! kinetics with fluid limits, socio-economic agent dynamics with
//! Fokker-Planck limits, and linear/epidemic transport with diffusion
//! limits.

pub mod agents;
pub mod error;
pub mod gas;
pub mod transport;

pub use error::{ModelError, Result};
