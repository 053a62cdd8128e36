//! Shared machinery: evaluating a model over a common sequence of parameter
//! draws and slicing the results per output time.
//!
//! Evaluations run in parallel but are collected in draw order and reduced
//! serially, so every estimate is independent of the thread count.

use kinuq_core::field::Field;
use rayon::prelude::*;

use crate::error::{config, EstimatorError, Result};
use crate::model::{ParametricModel, Qoi};

/// Seed handed to the model for the `k`-th parameter draw, derived the same
/// way the parameter draws derive theirs: runs under distinct master seeds
/// share neither draws nor solver noise.
pub(crate) fn sample_seed(master: u64, k: usize) -> u64 {
    kinuq_core::random::derive_seed(master, k as u64)
}

/// Evaluate `model` at each draw and reduce by the quantity of interest.
///
/// Returns the samples transposed into per-time ensembles:
/// `out[t][k]` is draw `k` reduced at output time `t`, so each `out[t]`
/// can be fed to the pointwise reducers directly.
pub(crate) fn solve_ensemble(
    model: &dyn ParametricModel,
    qoi: &Qoi,
    draws: &[Vec<f64>],
    master_seed: u64,
) -> Result<Vec<Vec<Field>>> {
    let times = model.output_times();
    let rows: Vec<Result<Vec<Field>>> = draws
        .par_iter()
        .enumerate()
        .map(|(k, z)| {
            let fields = model
                .solve(z, sample_seed(master_seed, k))
                .map_err(|e| EstimatorError::SampleFailure {
                    index: k,
                    message: e.to_string(),
                })?;
            if fields.len() != times.len() {
                return Err(config(format!(
                    "model returned {} fields for {} output times",
                    fields.len(),
                    times.len()
                )));
            }
            fields
                .iter()
                .map(|f| qoi.apply(f).map_err(EstimatorError::from))
                .collect()
        })
        .collect();

    let mut out: Vec<Vec<Field>> = (0..times.len())
        .map(|_| Vec::with_capacity(draws.len()))
        .collect();
    for row in rows {
        for (t, field) in row?.into_iter().enumerate() {
            out[t].push(field);
        }
    }
    Ok(out)
}

/// One control's contribution to the controlled variable at a fixed time:
/// its samples over the shared draws, its weight field, and the stand-in
/// for its expectation.
pub(crate) struct ControlTerm<'a> {
    pub samples: &'a [Field],
    pub weight: &'a Field,
    pub expectation: &'a Field,
}

/// The controlled variable per draw: `q_k - sum_h w_h (x_hk - e_h)`.
/// Its sample mean is the estimate; its spread is what the controls left.
pub(crate) fn controlled_ensemble(hi: &[Field], terms: &[ControlTerm]) -> Vec<Field> {
    hi.iter()
        .enumerate()
        .map(|(k, h)| {
            let mut v = h.clone();
            for term in terms {
                for ((o, &w), (&x, &e)) in v
                    .values_mut()
                    .iter_mut()
                    .zip(term.weight.values())
                    .zip(term.samples[k].values().iter().zip(term.expectation.values()))
                {
                    *o -= w * (x - e);
                }
            }
            v
        })
        .collect()
}

/// Pointwise sample mean and unbiased sample standard deviation.
pub(crate) fn mean_and_std(ensemble: &[Field]) -> kinuq_core::Result<(Field, Field)> {
    let mean = kinuq_core::stats::mean_field(ensemble)?;
    let mut std = kinuq_core::stats::variance_field(ensemble)?;
    for v in std.values_mut() {
        *v = v.sqrt();
    }
    Ok((mean, std))
}

/// Check that two models can enter the same estimator: identical parameter
/// boxes and matching output times.
pub(crate) fn check_compatible(
    hi: &dyn ParametricModel,
    lo: &dyn ParametricModel,
    role: &str,
) -> Result<()> {
    if hi.params().bounds() != lo.params().bounds() {
        return Err(config(format!(
            "{role} model lives on a different parameter box than the high-fidelity model"
        )));
    }
    let (ta, tb) = (hi.output_times(), lo.output_times());
    let same = ta.len() == tb.len()
        && ta
            .iter()
            .zip(tb)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same {
        return Err(config(format!(
            "{role} model reports different output times than the high-fidelity model"
        )));
    }
    Ok(())
}

/// Check that a precomputed expectation matches the reduced ensemble, one
/// field per output time on the same layout.
pub(crate) fn check_offline_expectation(
    expectation: &[Field],
    reduced: &[Vec<Field>],
    role: &str,
) -> Result<()> {
    if expectation.len() != reduced.len() {
        return Err(config(format!(
            "{role}: offline expectation has {} fields for {} output times",
            expectation.len(),
            reduced.len()
        )));
    }
    for (t, (e, ens)) in expectation.iter().zip(reduced).enumerate() {
        if !ens.is_empty() && !e.same_layout(&ens[0]) {
            return Err(config(format!(
                "{role}: offline expectation at time index {t} is on a different layout \
                 than the reduced model output"
            )));
        }
    }
    Ok(())
}
