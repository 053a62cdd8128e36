//! Pointwise control weights from paired sample ensembles.

use kinuq_core::field::Field;
use kinuq_core::stats::{covariance_field, mean_field, variance_field};

use crate::error::Result;

/// Relative floor below which a control's sample variance counts as zero:
/// the control is treated as constant at that node and switched off.
///
/// The floor is relative to the local squared sample mean, not to a global
/// field scale. Distribution tails are structurally tiny but their
/// covariance-to-variance ratios are perfectly conditioned, so a control
/// must only be dropped where it is constant to working precision; a global
/// threshold would silence exactly the nodes where a matched control still
/// cancels variance.
pub(crate) const DEGENERATE_REL_VAR: f64 = 1e-14;

pub(crate) fn is_degenerate(var: f64, mean: f64) -> bool {
    !(var > DEGENERATE_REL_VAR * mean * mean)
}

/// Relative floor below which a control's spread counts as invisible to the
/// target: the weight is switched off at that node.
///
/// The weight is a regression coefficient of the target samples on the
/// control samples. The target carries rounding noise of order machine
/// epsilon times its local scale, and the regression divides by the
/// control's spread, so a control whose spread sits far below the target's
/// scale receives pure noise, amplified by the scale ratio; with several
/// controls the weights can come out astronomically large while changing
/// the estimate by nothing. Below the square root of machine epsilon such
/// a control could at best cancel an O(1e-16) fraction of the variance, so
/// dropping it costs nothing and keeps the reported weights meaningful.
pub(crate) const RESOLVABLE_REL: f64 = 1e-8;

/// `hi_scale` is the target's local scale, `|mean| + std` at the node.
pub(crate) fn is_unresolvable(var: f64, hi_scale: f64) -> bool {
    !(var.sqrt() >= RESOLVABLE_REL * hi_scale)
}

/// Pointwise `Cov(hi, lo) / Var(lo)` over two paired ensembles, the
/// variance-minimizing weight for `lo` as a control on `hi`.
///
/// Where the control is degenerate (see [`DEGENERATE_REL_VAR`]) or its
/// spread falls below what the target samples resolve (see
/// [`RESOLVABLE_REL`]) the weight is set to zero, so an inert control never
/// injects spurious corrections. Returns the number of nodes zeroed this
/// way alongside the weight field.
pub fn optimal_lambda(hi: &[Field], lo: &[Field]) -> Result<(Field, usize)> {
    let cov = covariance_field(hi, lo)?;
    let var = variance_field(lo)?;
    let mean = mean_field(lo)?;
    let hi_var = variance_field(hi)?;
    let hi_mean = mean_field(hi)?;
    let (mut lam, mut dropped) = guarded_ratio(&cov, &var, &mean);
    let w = lam.values_mut();
    for i in 0..w.len() {
        let scale = hi_mean.values()[i].abs() + hi_var.values()[i].sqrt();
        if w[i] != 0.0 && is_unresolvable(var.values()[i], scale) {
            w[i] = 0.0;
            dropped += 1;
        }
    }
    Ok((lam, dropped))
}

pub(crate) fn guarded_ratio(cov: &Field, var: &Field, mean: &Field) -> (Field, usize) {
    let mut out = Field::zeros(var.layout().clone(), var.time);
    let mut dropped = 0usize;
    for (((o, &c), &v), &m) in out
        .values_mut()
        .iter_mut()
        .zip(cov.values())
        .zip(var.values())
        .zip(mean.values())
    {
        if is_degenerate(v, m) {
            dropped += 1;
        } else {
            *o = c / v;
        }
    }
    (out, dropped)
}
