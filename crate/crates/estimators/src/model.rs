//! The solver-facing contract: anything that maps a parameter draw to a
//! time series of fields can sit at any rung of an estimator hierarchy.

use std::fmt;
use std::sync::Arc;

use kinuq_core::field::Field;
use kinuq_core::random::ParamSpace;

/// Error type a model may surface from a single evaluation. Estimator
/// drivers wrap it together with the failing sample index.
pub type SolveError = Box<dyn std::error::Error + Send + Sync + 'static>;

/// A parametric forward model: one uncertain input `z`, one output field per
/// requested time.
///
/// Implementations must be deterministic in `(z, seed)`. Stochastic solvers
/// derive their noise from `seed`, which the drivers derive per draw via
/// [`kinuq_core::random::derive_seed`]; seeding generators through
/// [`kinuq_core::random::substream`] keeps inner replicates independent
/// across draws. Parameter draws are consumed from stream 1 of their own
/// keys, so solver noise must stay off stream 1; the default stream of
/// `substream` is safe.
///
/// All models entering one estimator call must share the same parameter
/// space and the same output times; the drivers check both.
pub trait ParametricModel: Send + Sync {
    /// The uncertain-input domain this model is defined on.
    fn params(&self) -> &ParamSpace;

    /// Times at which `solve` reports the state, strictly increasing.
    fn output_times(&self) -> &[f64];

    /// Evaluate the model at one parameter draw. The returned vector holds
    /// one field per entry of `output_times`, in order, all on one layout.
    fn solve(&self, z: &[f64], seed: u64) -> std::result::Result<Vec<Field>, SolveError>;
}

type QoiFn = dyn Fn(&Field) -> kinuq_core::Result<Field> + Send + Sync;

/// Deterministic reduction applied to every solver snapshot before any
/// statistics are taken. Control weights are computed per node of the
/// reduced field, so the choice of reduction decides whether weights vary
/// over phase space or only over physical space.
#[derive(Clone)]
pub enum Qoi {
    /// Keep the full snapshot.
    Full,
    /// Named pointwise map into a reduced field (moments, marginals, ...).
    Map { label: String, map: Arc<QoiFn> },
}

impl Qoi {
    pub fn full() -> Self {
        Qoi::Full
    }

    pub fn map(
        label: impl Into<String>,
        f: impl Fn(&Field) -> kinuq_core::Result<Field> + Send + Sync + 'static,
    ) -> Self {
        Qoi::Map {
            label: label.into(),
            map: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Qoi::Full => "full",
            Qoi::Map { label, .. } => label,
        }
    }

    pub fn apply(&self, f: &Field) -> kinuq_core::Result<Field> {
        match self {
            Qoi::Full => Ok(f.clone()),
            Qoi::Map { map, .. } => map(f),
        }
    }
}

impl fmt::Debug for Qoi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Qoi").field(&self.label()).finish()
    }
}

/// How a control's expectation enters the estimator.
#[derive(Clone)]
pub enum ControlExpectation {
    /// Known in closed form or precomputed offline: one field per output
    /// time, already reduced by the same quantity of interest. No budget
    /// correction is applied to the weights in this mode.
    Offline(Vec<Field>),
    /// Estimated from this many parameter draws, prefix-coupled with the
    /// high-fidelity draws. Must be at least the high-fidelity budget.
    Sampled(usize),
}

impl fmt::Debug for ControlExpectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlExpectation::Offline(fields) => {
                write!(f, "Offline({} fields)", fields.len())
            }
            ControlExpectation::Sampled(m) => write!(f, "Sampled({m})"),
        }
    }
}

/// A low-fidelity model together with the way its expectation is obtained.
#[derive(Clone)]
pub struct ControlVariate {
    pub model: Arc<dyn ParametricModel>,
    pub expectation: ControlExpectation,
}

impl ControlVariate {
    pub fn offline(model: Arc<dyn ParametricModel>, expectation: Vec<Field>) -> Self {
        ControlVariate {
            model,
            expectation: ControlExpectation::Offline(expectation),
        }
    }

    pub fn sampled(model: Arc<dyn ParametricModel>, budget: usize) -> Self {
        ControlVariate {
            model,
            expectation: ControlExpectation::Sampled(budget),
        }
    }
}
