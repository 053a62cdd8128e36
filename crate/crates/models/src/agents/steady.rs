//! Closed-form long-time states of the mean-field exchange models. Each
//! evaluator returns a normalized density on the model's state domain; the
//! bounded-confidence form has no closed-form normalization and is scaled by
//! quadrature.

use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::agents::Coeff;
use crate::error::{config, ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyStateSpec {
    /// `(1+w)^{(1+m)/s2 - 1} (1-w)^{(1-m)/s2 - 1}` on `[-1, 1]`, the
    /// long-time state under diffusion `sqrt(1 - w^2)`.
    Beta { m: Coeff, sigma2: f64 },
    /// Exponentially weighted power law on `[-1, 1]`, the long-time state
    /// under diffusion `1 - w^2` and compromise weight `p(z)`.
    MaxwellianLike { p: Coeff, m: Coeff, sigma2: f64 },
    /// Heavy-tailed state on `(0, inf)` of the wealth exchange, with shape
    /// `mu(z) = 1 + 2 lambda(z) / sigma2` and mean `m(z)`.
    InverseGamma { lambda: Coeff, m: Coeff, sigma2: f64 },
}

impl SteadyStateSpec {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            SteadyStateSpec::Beta { .. } | SteadyStateSpec::MaxwellianLike { .. } => (-1.0, 1.0),
            SteadyStateSpec::InverseGamma { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Density value at state `w` and input `z`.
    pub fn eval(&self, w: f64, z: f64) -> Result<f64> {
        match *self {
            SteadyStateSpec::Beta { m, sigma2 } => {
                let (alpha, beta) = beta_exponents(m.eval(z), sigma2)?;
                check_inside(w, -1.0, 1.0)?;
                // 2^{1 - alpha - beta} rescales the unit-interval Beta
                // density to [-1, 1].
                let ln = (alpha - 1.0) * (1.0 + w).ln() + (beta - 1.0) * (1.0 - w).ln()
                    - ln_beta(alpha, beta)
                    + (1.0 - alpha - beta) * std::f64::consts::LN_2;
                finite(ln.exp())
            }
            SteadyStateSpec::MaxwellianLike { p, m, sigma2 } => {
                check_inside(w, -1.0, 1.0)?;
                let c = normalization(p.eval(z), m.eval(z), sigma2)?;
                finite(c * maxwellian_like_kernel(w, p.eval(z), m.eval(z), sigma2))
            }
            SteadyStateSpec::InverseGamma { lambda, m, sigma2 } => {
                let (mu, scale) = inverse_gamma_shape(lambda.eval(z), m.eval(z), sigma2)?;
                if w < 0.0 {
                    return Err(config("wealth state must be nonnegative"));
                }
                if w == 0.0 {
                    return Ok(0.0);
                }
                let ln = mu * scale.ln() - ln_gamma(mu) - (1.0 + mu) * w.ln() - scale / w;
                finite(ln.exp())
            }
        }
    }

    /// Density on a set of states, computing any normalization only once.
    pub fn eval_on(&self, states: &[f64], z: f64) -> Result<Vec<f64>> {
        if let SteadyStateSpec::MaxwellianLike { p, m, sigma2 } = *self {
            let c = normalization(p.eval(z), m.eval(z), sigma2)?;
            return states
                .iter()
                .map(|&w| {
                    check_inside(w, -1.0, 1.0)?;
                    finite(c * maxwellian_like_kernel(w, p.eval(z), m.eval(z), sigma2))
                })
                .collect();
        }
        states.iter().map(|&w| self.eval(w, z)).collect()
    }
}

fn beta_exponents(m: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) {
        return Err(config("noise variance must be positive"));
    }
    if m.abs() >= 1.0 {
        return Err(config(format!("mean state {m} outside (-1, 1)")));
    }
    Ok(((1.0 + m) / sigma2, (1.0 - m) / sigma2))
}

fn inverse_gamma_shape(lambda: f64, m: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) || !(lambda > 0.0) {
        return Err(config(
            "wealth steady state needs lambda > 0 and sigma2 > 0",
        ));
    }
    if !(m > 0.0) {
        return Err(config(format!("mean wealth {m} must be positive")));
    }
    let mu = 1.0 + 2.0 * lambda / sigma2;
    Ok((mu, (mu - 1.0) * m))
}

/// Unnormalized bounded-confidence state; evaluated through logs so the
/// boundary competition between the power-law blowup and the essential zero
/// of the exponential never overflows.
fn maxwellian_like_kernel(w: f64, p: f64, m: f64, sigma2: f64) -> f64 {
    let one_m_w2 = 1.0 - w * w;
    if one_m_w2 <= 0.0 {
        return 0.0;
    }
    let c = p * m / (2.0 * sigma2);
    let ln = (-2.0 + c) * (1.0 + w).ln() + (-2.0 - c) * (1.0 - w).ln()
        - p * (1.0 - m * w) / (sigma2 * one_m_w2);
    ln.exp()
}

fn normalization(p: f64, m: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !(p > 0.0) {
        return Err(config(
            "bounded-confidence steady state needs p > 0 and sigma2 > 0",
        ));
    }
    if m.abs() >= 1.0 {
        return Err(config(format!("mean state {m} outside (-1, 1)")));
    }
    let mass = adaptive_simpson(
        &|w| maxwellian_like_kernel(w, p, m, sigma2),
        -1.0,
        1.0,
        1e-10,
        40,
    );
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(ModelError::DegenerateState(format!(
            "steady-state mass {mass} is not positive"
        )));
    }
    Ok(1.0 / mass)
}

fn check_inside(w: f64, lo: f64, hi: f64) -> Result<()> {
    if w < lo || w > hi {
        return Err(config(format!("state {w} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::DegenerateState(format!(
            "steady-state density evaluated to {v}"
        )))
    }
}

/// Recursive Simpson quadrature with Richardson correction.
pub(crate) fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(mid), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + mid), 0.5 * (mid + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_refine(f, a, mid, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_refine(f, mid, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}
