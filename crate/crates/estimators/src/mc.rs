//! Plain Monte Carlo over the parameter space, the baseline every
//! control-variate estimator is measured against.

use std::time::Instant;

use kinuq_core::stats::{mean_field, variance_field};

use crate::error::{config, Result};
use crate::model::{ParametricModel, Qoi};
use crate::report::EstimatorReport;
use crate::sampling::solve_ensemble;

/// Sample mean of the quantity of interest over `m` uniform parameter
/// draws.
///
/// `budgets` in the report is `[m]`; `lambda` is empty; `std` is the
/// pointwise sample standard deviation of the reduced samples.
pub fn mc_estimate(
    model: &dyn ParametricModel,
    qoi: &Qoi,
    m: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    if m < 2 {
        return Err(config("plain sampling needs at least 2 draws"));
    }
    let start = Instant::now();
    let draws = model.params().sample_uniform(m, seed)?;
    let per_time = solve_ensemble(model, qoi, &draws, seed)?;

    let mut mean = Vec::with_capacity(per_time.len());
    let mut std = Vec::with_capacity(per_time.len());
    for ensemble in &per_time {
        mean.push(mean_field(ensemble)?);
        let mut s = variance_field(ensemble)?;
        for v in s.values_mut() {
            *v = v.sqrt();
        }
        std.push(s);
    }
    Ok(EstimatorReport {
        times: model.output_times().to_vec(),
        mean,
        std,
        lambda: Vec::new(),
        budgets: vec![m],
        wall_time: start.elapsed(),
        diagnostics: Vec::new(),
    })
}
