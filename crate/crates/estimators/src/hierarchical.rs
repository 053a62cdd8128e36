//! A ladder of surrogates with shrinking budgets: each level is evaluated
//! at a prefix of the draw sequence, and consecutive levels correct each
//! other telescopically.

use std::sync::Arc;
use std::time::Instant;

use kinuq_core::field::Field;
use kinuq_core::stats::{covariance_field, mean_field, variance_field};

use crate::error::{config, Result};
use crate::lambda::{guarded_ratio, is_degenerate};
use crate::model::{ControlVariate, ParametricModel, Qoi};
use crate::report::EstimatorReport;
use crate::sampling::{check_compatible, controlled_ensemble, mean_and_std, solve_ensemble};

/// How the level weights are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HierarchyWeights {
    /// Each level's weight is the product of the pairwise ratios from that
    /// level up the ladder. Exact when each level sees only its neighbors,
    /// which is the regime the shrinking budgets are chosen for.
    #[default]
    QuasiOptimal,
    /// Solve the tridiagonal system that couples neighboring levels through
    /// their shared draws, with the budget fractions on the off-diagonals.
    /// Reduces to the product rule as the budget ratios go to zero.
    Tridiagonal,
}

/// Telescoping control-variate estimate over a hierarchy of surrogates.
///
/// `levels` are the surrogate models ordered cheapest first; the target
/// model `hi` sits on top. `budgets` has one more entry than `levels` and
/// must be strictly decreasing: level `h` (1-based) is evaluated at the
/// first `budgets[h-1]` draws, `hi` at the first `budgets[levels.len()]`.
/// Each level's expectation stand-in is its sample mean over the larger
/// neighboring budget, so every level corrects the next finer one.
///
/// For a single level the hierarchy is exactly the two-fidelity estimator
/// (both weighting rules coincide there) and the call is routed to it
/// wholesale, so the two entry points cannot drift apart.
///
/// `budgets` in the report echoes the input; `lambda[h][t]` is the combined
/// weight of level `h` at output time `t`; `std` is the pointwise sample
/// standard deviation of the controlled variable over the draws every model
/// shares, i.e. the finest prefix.
pub fn mscv_hierarchical(
    hi: &dyn ParametricModel,
    levels: &[Arc<dyn ParametricModel>],
    qoi: &Qoi,
    budgets: &[usize],
    seed: u64,
    weights: HierarchyWeights,
) -> Result<EstimatorReport> {
    if levels.is_empty() {
        return Err(config("at least one surrogate level is required"));
    }
    if budgets.len() != levels.len() + 1 {
        return Err(config(format!(
            "{} levels need {} budgets (one per level plus the top), got {}",
            levels.len(),
            levels.len() + 1,
            budgets.len()
        )));
    }
    if budgets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config("budgets must be strictly decreasing up the ladder"));
    }
    let top = *budgets.last().expect("budgets nonempty");
    if top < 2 {
        return Err(config("the top-level budget must be at least 2"));
    }
    for level in levels {
        check_compatible(hi, level.as_ref(), "surrogate level")?;
    }

    if levels.len() == 1 {
        let control = ControlVariate::sampled(levels[0].clone(), budgets[0]);
        let mut report = crate::bifidelity::mscv_bifidelity(hi, &control, qoi, top, seed)?;
        report.budgets = budgets.to_vec();
        return Ok(report);
    }

    let n_levels = levels.len();
    let start = Instant::now();
    let draws = hi.params().sample_uniform(budgets[0], seed)?;
    // q_level[h][t] holds budgets[h] samples of level h+1 (1-based).
    let mut q_level = Vec::with_capacity(n_levels);
    for (h, level) in levels.iter().enumerate() {
        q_level.push(solve_ensemble(
            level.as_ref(),
            qoi,
            &draws[..budgets[h]],
            seed,
        )?);
    }
    let q_hi = solve_ensemble(hi, qoi, &draws[..top], seed)?;

    let n_times = hi.output_times().len();
    let mut diagnostics = Vec::new();
    let mut mean = Vec::with_capacity(n_times);
    let mut std = Vec::with_capacity(n_times);
    let mut lambda: Vec<Vec<Field>> = vec![Vec::with_capacity(n_times); n_levels];

    for t in 0..n_times {
        for q in &q_level {
            if !q_hi[t][0].same_layout(&q[t][0]) {
                return Err(config(
                    "surrogate and target outputs live on different layouts after the reduction",
                ));
            }
        }

        // Neighbor statistics at the shared (smaller) budget of each pair:
        // level h against level h+1, the target playing level L+1.
        let mut var_h = Vec::with_capacity(n_levels);
        let mut mean_h = Vec::with_capacity(n_levels);
        let mut cov_up = Vec::with_capacity(n_levels);
        for h in 0..n_levels {
            let shared = budgets[h + 1];
            let this = &q_level[h][t][..shared];
            var_h.push(variance_field(this)?);
            mean_h.push(mean_field(this)?);
            let finer: &[Field] = if h + 1 < n_levels {
                &q_level[h + 1][t]
            } else {
                &q_hi[t]
            };
            cov_up.push(covariance_field(finer, this)?);
        }

        let lam_t = match weights {
            HierarchyWeights::QuasiOptimal => {
                quasi_optimal_weights(&var_h, &mean_h, &cov_up, t, &mut diagnostics)
            }
            HierarchyWeights::Tridiagonal => tridiagonal_weights(
                &var_h,
                &mean_h,
                &cov_up,
                budgets,
                t,
                &mut diagnostics,
            )?,
        };

        // Telescoping estimate: the expectation stand-in of level h is its
        // own mean over the larger neighboring budget.
        let mut mean_t = mean_field(&q_hi[t])?;
        for h in 0..n_levels {
            let wide = mean_field(&q_level[h][t])?;
            let narrow = mean_field(&q_level[h][t][..budgets[h + 1]])?;
            for ((o, &lam), (&nar, &wid)) in mean_t
                .values_mut()
                .iter_mut()
                .zip(lam_t[h].values())
                .zip(narrow.values().iter().zip(wide.values()))
            {
                *o -= lam * (nar - wid);
            }
        }
        mean.push(mean_t);

        // Spread of the controlled variable over the draws all models share.
        let wide_means: Vec<Field> = (0..n_levels)
            .map(|h| mean_field(&q_level[h][t]))
            .collect::<kinuq_core::Result<_>>()?;
        let terms: Vec<crate::sampling::ControlTerm> = (0..n_levels)
            .map(|h| crate::sampling::ControlTerm {
                samples: &q_level[h][t][..top],
                weight: &lam_t[h],
                expectation: &wide_means[h],
            })
            .collect();
        let controlled = controlled_ensemble(&q_hi[t], &terms);
        let (_, std_t) = mean_and_std(&controlled)?;
        std.push(std_t);

        for (h, lam) in lam_t.into_iter().enumerate() {
            lambda[h].push(lam);
        }
    }

    Ok(EstimatorReport {
        times: hi.output_times().to_vec(),
        mean,
        std,
        lambda,
        budgets: budgets.to_vec(),
        wall_time: start.elapsed(),
        diagnostics,
    })
}

/// Downward products of the neighbor ratios: the weight of level `h` is
/// `prod_{j >= h} Cov_j / Var_j`, accumulated from the top.
fn quasi_optimal_weights(
    var_h: &[Field],
    mean_h: &[Field],
    cov_up: &[Field],
    t: usize,
    diagnostics: &mut Vec<String>,
) -> Vec<Field> {
    let n_levels = var_h.len();
    let mut inert = 0usize;
    let mut weights = vec![Field::zeros(var_h[0].layout().clone(), var_h[0].time); n_levels];
    for h in (0..n_levels).rev() {
        let (ratio, dropped) = guarded_ratio(&cov_up[h], &var_h[h], &mean_h[h]);
        inert += dropped;
        weights[h] = ratio;
        if h + 1 < n_levels {
            let (upper, current) = {
                let (a, b) = weights.split_at_mut(h + 1);
                (&b[0], &mut a[h])
            };
            for (w, &u) in current.values_mut().iter_mut().zip(upper.values()) {
                *w *= u;
            }
        }
    }
    if inert > 0 {
        diagnostics.push(format!(
            "levels constant at {inert} node-level pairs at time index {t}; weight set to 0 there"
        ));
    }
    weights
}

/// Solve the neighbor-coupled system node by node with the Thomas
/// algorithm. Row `h`: `V_h w_h - mu_h C_{h-1} w_{h-1} -
/// (1 - mu_h) C_h w_{h+1} = 0`, where `mu_h` is the fraction of level `h`'s
/// wide budget its narrow budget makes up, the target's weight is pinned to
/// one, and `w_0 = 0` closes the bottom. Degenerate levels are dropped from
/// the system; their coupling entries vanish with them. Nodes where
/// elimination hits a vanishing pivot fall back to the product rule and are
/// counted in the diagnostics.
fn tridiagonal_weights(
    var_h: &[Field],
    mean_h: &[Field],
    cov_up: &[Field],
    budgets: &[usize],
    t: usize,
    diagnostics: &mut Vec<String>,
) -> Result<Vec<Field>> {
    let n_levels = var_h.len();
    let layout = var_h[0].layout().clone();
    let time = var_h[0].time;
    let n_nodes = var_h[0].values().len();

    // mu[h] for 1-based level h+1: narrow budget over the sum of both
    // budgets the level is evaluated under.
    let mu: Vec<f64> = (0..n_levels)
        .map(|h| budgets[h + 1] as f64 / (budgets[h] as f64 + budgets[h + 1] as f64))
        .collect();

    let mut lam_values = vec![vec![0.0f64; n_nodes]; n_levels];
    let mut inert = 0usize;
    let mut pivot_fallback = 0usize;

    let mut diag = vec![0.0f64; n_levels];
    let mut lower = vec![0.0f64; n_levels];
    let mut upper = vec![0.0f64; n_levels];
    let mut rhs = vec![0.0f64; n_levels];
    let mut active = Vec::with_capacity(n_levels);

    for i in 0..n_nodes {
        active.clear();
        for h in 0..n_levels {
            if is_degenerate(var_h[h].values()[i], mean_h[h].values()[i]) {
                inert += 1;
            } else {
                active.push(h);
            }
        }
        if active.is_empty() {
            continue;
        }

        // Assemble the reduced system over the active levels. Couplings
        // only exist between levels adjacent in the original ladder; a
        // dropped level in between leaves a zero in its place, which the
        // elimination handles like a block boundary.
        let a = active.len();
        for (r, &h) in active.iter().enumerate() {
            diag[r] = var_h[h].values()[i];
            lower[r] = if r > 0 && active[r - 1] + 1 == h {
                // cov_up[h-1] is Cov(f_{h+1}, f_h) at the budget level h is
                // narrow on, exactly the coupling the system wants.
                -mu[h] * cov_up[h - 1].values()[i]
            } else {
                0.0
            };
            let couples_up = r + 1 < a && active[r + 1] == h + 1;
            if h == n_levels - 1 {
                upper[r] = 0.0;
                rhs[r] = (1.0 - mu[h]) * cov_up[h].values()[i];
            } else if couples_up {
                upper[r] = -(1.0 - mu[h]) * cov_up[h].values()[i];
                rhs[r] = 0.0;
            } else {
                upper[r] = 0.0;
                rhs[r] = 0.0;
            }
        }

        if thomas_in_place(&mut diag[..a], &lower[..a], &upper[..a], &mut rhs[..a]) {
            for (r, &h) in active.iter().enumerate() {
                lam_values[h][i] = rhs[r];
            }
        } else {
            // Vanishing pivot: take the product-rule weights at this node.
            pivot_fallback += 1;
            let mut acc = 1.0;
            for h in (0..n_levels).rev() {
                if active.contains(&h) {
                    acc *= cov_up[h].values()[i] / var_h[h].values()[i];
                    lam_values[h][i] = acc;
                } else {
                    lam_values[h][i] = 0.0;
                    acc = 0.0;
                }
            }
        }
    }

    if inert > 0 {
        diagnostics.push(format!(
            "levels constant at {inert} node-level pairs at time index {t}; weight set to 0 there"
        ));
    }
    if pivot_fallback > 0 {
        diagnostics.push(format!(
            "neighbor system hit a vanishing pivot at {pivot_fallback} nodes at time index {t}; \
             used product weights there"
        ));
    }

    let mut out = Vec::with_capacity(n_levels);
    for values in lam_values {
        out.push(Field::from_values(layout.clone(), time, values)?);
    }
    Ok(out)
}

/// Thomas elimination; `diag` and `rhs` are clobbered, the solution lands
/// in `rhs`. Returns false if a pivot vanishes.
fn thomas_in_place(diag: &mut [f64], lower: &[f64], upper: &[f64], rhs: &mut [f64]) -> bool {
    let n = diag.len();
    for r in 1..n {
        if diag[r - 1] == 0.0 {
            return false;
        }
        let factor = lower[r] / diag[r - 1];
        diag[r] -= factor * upper[r - 1];
        rhs[r] -= factor * rhs[r - 1];
    }
    if diag[n - 1] == 0.0 {
        return false;
    }
    rhs[n - 1] /= diag[n - 1];
    for r in (0..n - 1).rev() {
        rhs[r] = (rhs[r] - upper[r] * rhs[r + 1]) / diag[r];
    }
    true
}
