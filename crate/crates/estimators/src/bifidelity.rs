//! Two-fidelity control-variate estimator: a cheap model, evaluated at the
//! same parameter draws as the expensive one, absorbs the share of the
//! variance the two have in common.

use std::time::Instant;

use kinuq_core::field::Field;
use kinuq_core::stats::mean_field;

use crate::error::{config, Result};
use crate::model::{ControlExpectation, ControlVariate, ParametricModel, Qoi};
use crate::report::EstimatorReport;
use crate::sampling::{
    check_compatible, check_offline_expectation, controlled_ensemble, mean_and_std,
    solve_ensemble, ControlTerm,
};

/// Control-variate estimate of the expected quantity of interest with a
/// single low-fidelity control.
///
/// The high-fidelity model is evaluated at `m` draws; the control at the
/// same `m` draws plus, in [`ControlExpectation::Sampled`] mode, at
/// `m_e - m` further draws from the same sequence so its own expectation
/// can be estimated. Weights are the pointwise covariance-to-variance
/// ratios over the `m` common draws; in sampled mode they are shrunk by
/// `m_e / (m + m_e)`, which accounts for the noise the estimated control
/// expectation adds. With an offline expectation there is nothing to
/// account for and the unshrunk weights are used.
///
/// `budgets` in the report is `[m, m_e]` (sampled) or `[m]` (offline);
/// `lambda` holds one weight field per output time under a single control
/// index.
pub fn mscv_bifidelity(
    hi: &dyn ParametricModel,
    control: &ControlVariate,
    qoi: &Qoi,
    m: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    bifidelity_driver(hi, control, qoi, m, seed, None)
}

/// Same estimator with the weight pinned to a caller-chosen constant at
/// every node and time, bypassing the covariance estimate entirely. The
/// budget shrinkage is skipped too: the caller owns the weight.
///
/// Mainly useful for studying the estimator itself; with a fixed weight the
/// estimate is an unbiased function of the draws whatever the weight is.
pub fn mscv_bifidelity_fixed_lambda(
    hi: &dyn ParametricModel,
    control: &ControlVariate,
    qoi: &Qoi,
    m: usize,
    seed: u64,
    lambda: f64,
) -> Result<EstimatorReport> {
    bifidelity_driver(hi, control, qoi, m, seed, Some(lambda))
}

fn bifidelity_driver(
    hi: &dyn ParametricModel,
    control: &ControlVariate,
    qoi: &Qoi,
    m: usize,
    seed: u64,
    fixed_lambda: Option<f64>,
) -> Result<EstimatorReport> {
    if m < 2 {
        return Err(config("control-variate estimate needs at least 2 draws"));
    }
    check_compatible(hi, control.model.as_ref(), "control")?;
    let m_e = match control.expectation {
        ControlExpectation::Sampled(m_e) => {
            if m_e < m {
                return Err(config(format!(
                    "control expectation budget {m_e} is below the high-fidelity budget {m}; \
                     the control must be evaluated at least at the shared draws"
                )));
            }
            Some(m_e)
        }
        ControlExpectation::Offline(_) => None,
    };

    let start = Instant::now();
    let draws = hi.params().sample_uniform(m_e.unwrap_or(m).max(m), seed)?;
    let q_lo = solve_ensemble(control.model.as_ref(), qoi, &draws, seed)?;
    let q_hi = solve_ensemble(hi, qoi, &draws[..m], seed)?;

    let n_times = hi.output_times().len();
    let mut diagnostics = Vec::new();
    let mut mean = Vec::with_capacity(n_times);
    let mut std = Vec::with_capacity(n_times);
    let mut lambda = Vec::with_capacity(n_times);

    let expectation: Vec<Field> = match &control.expectation {
        ControlExpectation::Offline(fields) => {
            check_offline_expectation(fields, &q_lo, "control")?;
            fields.clone()
        }
        ControlExpectation::Sampled(_) => q_lo
            .iter()
            .map(|ens| mean_field(ens))
            .collect::<kinuq_core::Result<_>>()?,
    };

    for t in 0..n_times {
        let hi_t = &q_hi[t];
        let lo_t = &q_lo[t][..m];
        if !hi_t[0].same_layout(&lo_t[0]) {
            return Err(config(
                "high- and low-fidelity outputs live on different layouts after the reduction",
            ));
        }

        let lam_t = match fixed_lambda {
            Some(c) => {
                let mut f = Field::zeros(lo_t[0].layout().clone(), lo_t[0].time);
                f.values_mut().fill(c);
                f
            }
            None => {
                let (mut lam, dropped) = crate::lambda::optimal_lambda(hi_t, lo_t)?;
                if dropped > 0 {
                    diagnostics.push(format!(
                        "control constant at {dropped} nodes at time index {t}; weight set to 0 there"
                    ));
                }
                if let Some(m_e) = m_e {
                    lam.scale(m_e as f64 / (m as f64 + m_e as f64));
                }
                lam
            }
        };

        let controlled = controlled_ensemble(
            hi_t,
            &[ControlTerm {
                samples: lo_t,
                weight: &lam_t,
                expectation: &expectation[t],
            }],
        );
        let (mean_t, std_t) = mean_and_std(&controlled)?;
        mean.push(mean_t);
        std.push(std_t);
        lambda.push(lam_t);
    }

    Ok(EstimatorReport {
        times: hi.output_times().to_vec(),
        mean,
        std,
        lambda: vec![lambda],
        budgets: match m_e {
            Some(m_e) => vec![m, m_e],
            None => vec![m],
        },
        wall_time: start.elapsed(),
        diagnostics,
    })
}
