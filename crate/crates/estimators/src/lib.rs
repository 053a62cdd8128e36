//! Variance-reduced estimation of expectations over uncertain kinetic
//! solves.
//!
//! The expensive model is sampled at a handful of parameter draws; cheaper
//! models evaluated at the same draws act as control variates, absorbing
//! the share of the variance they can explain. The crate provides the
//! single-control estimator with an optional sampled control expectation,
//! the many-control version with coupled or orthogonalized weights, and the
//! budgeted ladder where each level corrects the next. Weights are computed
//! per node of the reduced output field, so the variance reduction adapts
//! to where each control actually tracks the target.
//!
//! All estimators draw from one prefix-coupled parameter sequence and
//! reduce serially in draw order: results are reproducible from the seed
//! alone, independent of the thread count.

pub mod bifidelity;
pub mod collocation;
pub mod error;
pub mod hierarchical;
pub mod lambda;
pub mod mc;
pub mod model;
pub mod multifidelity;
pub mod report;
mod sampling;

pub use bifidelity::{mscv_bifidelity, mscv_bifidelity_fixed_lambda};
pub use collocation::collocation_expectation;
pub use error::{EstimatorError, Result};
pub use hierarchical::{mscv_hierarchical, HierarchyWeights};
pub use lambda::optimal_lambda;
pub use mc::mc_estimate;
pub use model::{ControlExpectation, ControlVariate, ParametricModel, Qoi, SolveError};
pub use multifidelity::{mscv_multifidelity, MultiFidelityOptions};
pub use report::EstimatorReport;
