//! Offline expectations for smooth surrogates: tensor quadrature over the
//! parameter box instead of sampling, so the control's mean enters the
//! estimators with negligible error.

use kinuq_core::field::Field;
use kinuq_core::gauss_legendre;
use rayon::prelude::*;

use crate::error::{config, EstimatorError, Result};
use crate::model::{ParametricModel, Qoi};
use crate::sampling::sample_seed;

/// Expectation of the reduced model output over the uniform parameter box
/// by tensor Gauss-Legendre quadrature with `nodes_per_dim` points per
/// dimension, one field per output time.
///
/// Exact for outputs polynomial of degree `2 nodes_per_dim - 1` in each
/// parameter, and spectrally accurate for smooth ones, so twenty nodes or
/// so put the quadrature error far below any sampling error. Intended for
/// deterministic surrogates: the per-node seed is forwarded to `solve`, but
/// averaging noise by quadrature weights does not converge it away, so a
/// stochastic model here leaves residual noise in the result.
pub fn collocation_expectation(
    model: &dyn ParametricModel,
    qoi: &Qoi,
    nodes_per_dim: usize,
    seed: u64,
) -> Result<Vec<Field>> {
    let dim = model.params().dim();
    if nodes_per_dim == 0 {
        return Err(config("quadrature needs at least one node per dimension"));
    }
    let total = nodes_per_dim
        .checked_pow(dim as u32)
        .filter(|&t| t <= 200_000)
        .ok_or_else(|| {
            config(format!(
                "tensor quadrature with {nodes_per_dim} nodes in {dim} dimensions is too large"
            ))
        })?;

    let rule = gauss_legendre(nodes_per_dim)?;
    let mut axes = Vec::with_capacity(dim);
    for &(lo, hi) in model.params().bounds() {
        // Normalizing by the box volume turns the weights into a discrete
        // probability: each 1d factor sums to one.
        let (nodes, weights) = rule.mapped_to(lo, hi);
        let widths: Vec<f64> = weights.iter().map(|w| w / (hi - lo)).collect();
        axes.push((nodes, widths));
    }

    let evaluations: Vec<Result<(f64, Vec<Field>)>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let mut z = Vec::with_capacity(dim);
            let mut weight = 1.0;
            for (nodes, weights) in &axes {
                let j = idx % nodes_per_dim;
                idx /= nodes_per_dim;
                z.push(nodes[j]);
                weight *= weights[j];
            }
            let fields = model
                .solve(&z, sample_seed(seed, flat))
                .map_err(|e| EstimatorError::SampleFailure {
                    index: flat,
                    message: e.to_string(),
                })?;
            let reduced: Vec<Field> = fields
                .iter()
                .map(|f| qoi.apply(f).map_err(EstimatorError::from))
                .collect::<Result<_>>()?;
            Ok((weight, reduced))
        })
        .collect();

    let n_times = model.output_times().len();
    let mut out: Option<Vec<Field>> = None;
    for eval in evaluations {
        let (weight, reduced) = eval?;
        if reduced.len() != n_times {
            return Err(config(format!(
                "model returned {} fields for {n_times} output times",
                reduced.len()
            )));
        }
        match &mut out {
            None => {
                out = Some(
                    reduced
                        .into_iter()
                        .map(|mut f| {
                            f.scale(weight);
                            f
                        })
                        .collect(),
                );
            }
            Some(acc) => {
                for (a, f) in acc.iter_mut().zip(&reduced) {
                    a.add_scaled(f, weight)?;
                }
            }
        }
    }
    Ok(out.expect("at least one quadrature node"))
}
