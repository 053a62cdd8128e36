//! Several controls at once. The weights solve a coupled system built from
//! the controls' mutual covariances, so information two controls share is
//! not subtracted twice.

use std::time::Instant;

use kinuq_core::field::Field;
use kinuq_core::stats::{covariance_field, mean_field, variance_field};
use nalgebra::{DMatrix, DVector};

use crate::error::{config, Result};
use crate::lambda::{guarded_ratio, is_degenerate, is_unresolvable};
use crate::model::{ControlExpectation, ControlVariate, ParametricModel, Qoi};
use crate::report::EstimatorReport;
use crate::sampling::{
    check_compatible, check_offline_expectation, controlled_ensemble, mean_and_std,
    solve_ensemble, ControlTerm,
};

/// Knobs for [`mscv_multifidelity`].
#[derive(Debug, Clone, Default)]
pub struct MultiFidelityOptions {
    /// Orthogonalize the controls against each other (pointwise
    /// Gram-Schmidt over the shared draws) instead of solving the coupled
    /// weight system. Equivalent in exact arithmetic; each weight then
    /// comes from a scalar ratio, so nothing can go singular, and a control
    /// that is redundant given its predecessors ends up with weight zero.
    pub orthogonalize: bool,
}

/// Control-variate estimate with any number of low-fidelity controls.
///
/// All models are evaluated at a shared prefix-coupled draw sequence: the
/// high-fidelity model at the first `m` draws, each control at its own
/// expectation budget (or at `m` when its expectation is offline). At every
/// node of the reduced field the weights solve `C w = b`, where `C` is the
/// sample covariance matrix of the controls over the `m` shared draws and
/// `b` their covariances with the high-fidelity samples; the system is
/// solved in correlation form, so mismatched control scales cannot spoil
/// its conditioning. Controls that are constant at a node, or whose spread
/// there is below what the high-fidelity samples resolve, are dropped at
/// that node; if the remaining system still fails to factor it is retried
/// with a diagonal shift of `1e-12`, and if that fails too the node falls
/// back to the single best-correlated control. All these events are
/// counted in the diagnostics.
///
/// No budget shrinkage is applied to the weights here; the coupled system
/// is solved as estimated.
///
/// `budgets` in the report is `[m, b_1, ..., b_L]`, where `b_h` is the draw
/// count control `h` was evaluated at. `lambda[h][t]` is the weight field
/// of control `h` at output time `t`; in orthogonalized mode the weights
/// refer to the orthogonalized controls, in declaration order.
pub fn mscv_multifidelity(
    hi: &dyn ParametricModel,
    controls: &[ControlVariate],
    qoi: &Qoi,
    m: usize,
    seed: u64,
    options: &MultiFidelityOptions,
) -> Result<EstimatorReport> {
    if controls.is_empty() {
        return Err(config("at least one control is required"));
    }
    if m < 2 {
        return Err(config("control-variate estimate needs at least 2 draws"));
    }
    let mut draw_count = m;
    for c in controls {
        check_compatible(hi, c.model.as_ref(), "control")?;
        if let ControlExpectation::Sampled(m_e) = c.expectation {
            if m_e < m {
                return Err(config(format!(
                    "control expectation budget {m_e} is below the high-fidelity budget {m}"
                )));
            }
            draw_count = draw_count.max(m_e);
        }
    }

    let start = Instant::now();
    let draws = hi.params().sample_uniform(draw_count, seed)?;
    let q_hi = solve_ensemble(hi, qoi, &draws[..m], seed)?;

    let n_levels = controls.len();
    let mut budgets = vec![m];
    let mut q_lo = Vec::with_capacity(n_levels);
    let mut expectations: Vec<Vec<Field>> = Vec::with_capacity(n_levels);
    for c in controls {
        let extent = match c.expectation {
            ControlExpectation::Sampled(m_e) => m_e,
            ControlExpectation::Offline(_) => m,
        };
        let q = solve_ensemble(c.model.as_ref(), qoi, &draws[..extent], seed)?;
        let e = match &c.expectation {
            ControlExpectation::Offline(fields) => {
                check_offline_expectation(fields, &q, "control")?;
                fields.clone()
            }
            ControlExpectation::Sampled(_) => q
                .iter()
                .map(|ens| mean_field(ens))
                .collect::<kinuq_core::Result<_>>()?,
        };
        budgets.push(extent);
        q_lo.push(q);
        expectations.push(e);
    }

    let n_times = hi.output_times().len();
    let mut diagnostics = Vec::new();
    let mut mean = Vec::with_capacity(n_times);
    let mut std = Vec::with_capacity(n_times);
    let mut lambda: Vec<Vec<Field>> = vec![Vec::with_capacity(n_times); n_levels];

    for t in 0..n_times {
        let hi_t = &q_hi[t];
        let lo_t: Vec<&[Field]> = q_lo.iter().map(|q| &q[t][..m]).collect();
        for lo in &lo_t {
            if !hi_t[0].same_layout(&lo[0]) {
                return Err(config(
                    "high- and low-fidelity outputs live on different layouts after the reduction",
                ));
            }
        }

        if options.orthogonalize {
            orthogonalized_step(
                hi_t,
                &lo_t,
                &expectations,
                t,
                &mut mean,
                &mut std,
                &mut lambda,
                &mut diagnostics,
            )?;
        } else {
            coupled_step(
                hi_t,
                &lo_t,
                &expectations,
                t,
                &mut mean,
                &mut std,
                &mut lambda,
                &mut diagnostics,
            )?;
        }
    }

    Ok(EstimatorReport {
        times: hi.output_times().to_vec(),
        mean,
        std,
        lambda,
        budgets,
        wall_time: start.elapsed(),
        diagnostics,
    })
}

/// Weights from the coupled covariance system, node by node.
#[allow(clippy::too_many_arguments)]
fn coupled_step(
    hi_t: &[Field],
    lo_t: &[&[Field]],
    expectations: &[Vec<Field>],
    t: usize,
    mean: &mut Vec<Field>,
    std: &mut Vec<Field>,
    lambda: &mut [Vec<Field>],
    diagnostics: &mut Vec<String>,
) -> Result<()> {
    let n_levels = lo_t.len();
    let mut var = Vec::with_capacity(n_levels);
    let mut lo_mean = Vec::with_capacity(n_levels);
    let mut rhs = Vec::with_capacity(n_levels);
    for lo in lo_t {
        var.push(variance_field(lo)?);
        lo_mean.push(mean_field(lo)?);
        rhs.push(covariance_field(hi_t, lo)?);
    }
    let hi_var = variance_field(hi_t)?;
    let hi_mean = mean_field(hi_t)?;
    // Upper triangle of the control covariance matrix; (h, k) with h < k
    // sits at cross[h][k - h - 1].
    let mut cross: Vec<Vec<Field>> = Vec::with_capacity(n_levels);
    for h in 0..n_levels {
        let mut row = Vec::with_capacity(n_levels - h - 1);
        for k in h + 1..n_levels {
            row.push(covariance_field(lo_t[h], lo_t[k])?);
        }
        cross.push(row);
    }

    let layout = lo_t[0][0].layout().clone();
    let time = lo_t[0][0].time;
    let n_nodes = var[0].values().len();
    let mut lam_values = vec![vec![0.0f64; n_nodes]; n_levels];
    let mut inert = 0usize;
    let mut unresolvable = 0usize;
    let mut shifted = 0usize;
    let mut fallback = 0usize;

    for i in 0..n_nodes {
        let hi_scale = hi_mean.values()[i].abs() + hi_var.values()[i].sqrt();
        let mut active = Vec::with_capacity(n_levels);
        for h in 0..n_levels {
            if is_degenerate(var[h].values()[i], lo_mean[h].values()[i]) {
                inert += 1;
            } else if is_unresolvable(var[h].values()[i], hi_scale) {
                unresolvable += 1;
            } else {
                active.push(h);
            }
        }
        if active.is_empty() {
            continue;
        }
        // Solve in correlation form: control scales at one node can differ
        // by hundreds of orders of magnitude (distribution tails), which
        // would swamp the covariance matrix's conditioning even though the
        // correlation structure is benign. Each control is normalized by
        // its standard deviation, sequentially so no intermediate product
        // underflows, and the weights are unscaled afterwards.
        let a = active.len();
        let sigma: Vec<f64> = active.iter().map(|&h| var[h].values()[i].sqrt()).collect();
        let entry = |r: usize, c: usize| -> f64 {
            let (h, k) = (active[r], active[c]);
            if h == k {
                1.0
            } else {
                let (lo_idx, hi_idx) = (h.min(k), h.max(k));
                cross[lo_idx][hi_idx - lo_idx - 1].values()[i] / sigma[r] / sigma[c]
            }
        };
        let c_mat = DMatrix::from_fn(a, a, entry);
        let b_vec = DVector::from_fn(a, |r, _| rhs[active[r]].values()[i] / sigma[r]);

        let solution = match c_mat.clone().cholesky() {
            Some(ch) if factor_well_conditioned(&ch) => Some(ch.solve(&b_vec)),
            _ => {
                let shift = 1e-12 * c_mat.trace() / a as f64;
                let regularized = c_mat + DMatrix::identity(a, a) * shift;
                match regularized.cholesky() {
                    Some(ch) if factor_well_conditioned(&ch) => {
                        shifted += 1;
                        Some(ch.solve(&b_vec))
                    }
                    _ => None,
                }
            }
        };
        match solution {
            Some(w) => {
                for (r, &h) in active.iter().enumerate() {
                    lam_values[h][i] = w[r] / sigma[r];
                }
            }
            None => {
                // Keep only the control whose samples track the target
                // best; scores are |Cov| / sqrt(Var), the correlation up to
                // the common high-fidelity factor.
                fallback += 1;
                let mut best = active[0];
                let score = |h: usize| rhs[h].values()[i].abs() / var[h].values()[i].sqrt();
                for &h in &active[1..] {
                    if score(h) > score(best) {
                        best = h;
                    }
                }
                lam_values[best][i] = rhs[best].values()[i] / var[best].values()[i];
            }
        }
    }

    if inert > 0 {
        diagnostics.push(format!(
            "controls constant at {inert} node-level pairs at time index {t}; weight set to 0 there"
        ));
    }
    if unresolvable > 0 {
        diagnostics.push(format!(
            "controls unresolvable against the target at {unresolvable} node-level pairs \
             at time index {t}; weight set to 0 there"
        ));
    }
    if shifted > 0 {
        diagnostics.push(format!(
            "weight system needed a diagonal shift at {shifted} nodes at time index {t}"
        ));
    }
    if fallback > 0 {
        diagnostics.push(format!(
            "weight system stayed singular at {fallback} nodes at time index {t}; \
             fell back to the best-correlated single control"
        ));
    }

    let mut lam_fields = Vec::with_capacity(n_levels);
    for values in lam_values {
        lam_fields.push(Field::from_values(layout.clone(), time, values)?);
    }
    let terms: Vec<ControlTerm> = (0..n_levels)
        .map(|h| ControlTerm {
            samples: lo_t[h],
            weight: &lam_fields[h],
            expectation: &expectations[h][t],
        })
        .collect();
    let controlled = controlled_ensemble(hi_t, &terms);
    let (mean_t, std_t) = mean_and_std(&controlled)?;
    mean.push(mean_t);
    std.push(std_t);
    for (h, lam) in lam_fields.into_iter().enumerate() {
        lambda[h].push(lam);
    }
    Ok(())
}

/// Weights via pointwise Gram-Schmidt over the shared draws: each control
/// is stripped of its components along the previous ones, after which every
/// weight is a plain covariance-to-variance ratio against the residual.
/// Expectations are carried through the same recursion, so the estimate
/// stays unbiased for any weights.
#[allow(clippy::too_many_arguments)]
fn orthogonalized_step(
    hi_t: &[Field],
    lo_t: &[&[Field]],
    expectations: &[Vec<Field>],
    t: usize,
    mean: &mut Vec<Field>,
    std: &mut Vec<Field>,
    lambda: &mut [Vec<Field>],
    diagnostics: &mut Vec<String>,
) -> Result<()> {
    let (g, eg, g_var, g_mean) = orthogonalize(
        lo_t,
        &expectations.iter().map(|e| e[t].clone()).collect::<Vec<_>>(),
    )?;

    let n_levels = lo_t.len();
    let mut inert = 0usize;
    let mut gammas = Vec::with_capacity(n_levels);
    for h in 0..n_levels {
        let cov = covariance_field(hi_t, &g[h])?;
        let (gamma, dropped) = guarded_ratio(&cov, &g_var[h], &g_mean[h]);
        inert += dropped;
        gammas.push(gamma);
    }
    if inert > 0 {
        diagnostics.push(format!(
            "orthogonalized controls inert at {inert} node-level pairs at time index {t}; \
             weight set to 0 there"
        ));
    }

    let terms: Vec<ControlTerm> = (0..n_levels)
        .map(|h| ControlTerm {
            samples: &g[h],
            weight: &gammas[h],
            expectation: &eg[h],
        })
        .collect();
    let controlled = controlled_ensemble(hi_t, &terms);
    let (mean_t, std_t) = mean_and_std(&controlled)?;
    mean.push(mean_t);
    std.push(std_t);
    for (h, gamma) in gammas.into_iter().enumerate() {
        lambda[h].push(gamma);
    }
    Ok(())
}

/// Pointwise Gram-Schmidt of control ensembles over the draw axis.
///
/// Returns the orthogonalized ensembles, their expectations under the same
/// recursion, and their pointwise sample variance and mean. Residuals that
/// are constant at a node contribute nothing there: the projection weight
/// onto them is zero by the degeneracy guard.
type Orthogonalized = (Vec<Vec<Field>>, Vec<Field>, Vec<Field>, Vec<Field>);

fn orthogonalize(lo_t: &[&[Field]], expectations: &[Field]) -> Result<Orthogonalized> {
    let n_levels = lo_t.len();
    let mut g: Vec<Vec<Field>> = Vec::with_capacity(n_levels);
    let mut eg: Vec<Field> = Vec::with_capacity(n_levels);
    let mut g_var: Vec<Field> = Vec::with_capacity(n_levels);
    let mut g_mean: Vec<Field> = Vec::with_capacity(n_levels);

    for h in 0..n_levels {
        let mut gh: Vec<Field> = lo_t[h].to_vec();
        let mut egh = expectations[h].clone();
        for j in 0..h {
            let cov = covariance_field(&g[j], lo_t[h])?;
            let (alpha, _) = guarded_ratio(&cov, &g_var[j], &g_mean[j]);
            for (sample, prev) in gh.iter_mut().zip(&g[j]) {
                sub_pointwise(sample, &alpha, prev);
            }
            sub_pointwise(&mut egh, &alpha, &eg[j]);
        }
        g_var.push(variance_field(&gh)?);
        g_mean.push(mean_field(&gh)?);
        g.push(gh);
        eg.push(egh);
    }
    Ok((g, eg, g_var, g_mean))
}

/// Nearly singular factors pass Cholesky but put garbage in the weights;
/// the squared diagonal spread of the factor bounds the condition number
/// from below, so reject factors whose weights could lose every digit.
fn factor_well_conditioned(ch: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> bool {
    let l = ch.l_dirty();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    lo > 0.0 && (hi / lo) * (hi / lo) < 1e14
}

/// `out -= w .* x`, all on one layout.
fn sub_pointwise(out: &mut Field, w: &Field, x: &Field) {
    for ((o, &w), &x) in out
        .values_mut()
        .iter_mut()
        .zip(w.values())
        .zip(x.values())
    {
        *o -= w * x;
    }
}
