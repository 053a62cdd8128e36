use std::time::Duration;

use kinuq_core::field::Field;

/// What every estimator hands back: the estimate itself plus enough
/// bookkeeping to judge it.
///
/// `mean[t]` is the estimate of the expected quantity of interest at
/// `times[t]`. `std[t]` is the pointwise unbiased sample standard deviation
/// of the controlled variable, i.e. of `q - sum_h lambda_h (q_h - <q_h>)`
/// over the high-fidelity draws; for plain sampling it degenerates to the
/// sample standard deviation of `q`. It measures how much spread the
/// controls left behind, not the error of `mean` itself (divide by the
/// square root of the budget for that).
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    /// Output times, shared by every model in the call.
    pub times: Vec<f64>,
    /// One estimate field per output time.
    pub mean: Vec<Field>,
    /// Pointwise sample standard deviation of the controlled variable.
    pub std: Vec<Field>,
    /// Control weights, outer index control (or hierarchy level), inner
    /// index output time. Empty for plain sampling.
    pub lambda: Vec<Vec<Field>>,
    /// Sample budgets as used, highest fidelity first. Each estimator
    /// documents the exact layout of this vector.
    pub budgets: Vec<usize>,
    /// Wall-clock time of the whole call, model evaluations included.
    pub wall_time: Duration,
    /// Human-readable notes about degeneracies the run had to work around
    /// (inert controls, singular weight systems, fallbacks taken).
    pub diagnostics: Vec<String>,
}
