use crate::error::{invalid, CoreError, Result};
use crate::field::Field;

/// Arithmetic mean; empty input is an error.
pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(invalid("mean of an empty sample"));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Unbiased sample variance with the 1/(M-1) normalization.
pub fn sample_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(CoreError::InsufficientSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let m = mean(xs)?;
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    Ok(ss / (xs.len() - 1) as f64)
}

pub fn sample_std(xs: &[f64]) -> Result<f64> {
    Ok(sample_variance(xs)?.sqrt())
}

/// Unbiased sample covariance with the 1/(M-1) normalization.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(invalid("covariance needs samples of equal length"));
    }
    if xs.len() < 2 {
        return Err(CoreError::InsufficientSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let mx = mean(xs)?;
    let my = mean(ys)?;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .sum();
    Ok(ss / (xs.len() - 1) as f64)
}

fn check_ensemble(fields: &[Field], need: usize) -> Result<()> {
    if fields.len() < need {
        return Err(CoreError::InsufficientSamples {
            need,
            got: fields.len(),
        });
    }
    for f in &fields[1..] {
        if !fields[0].same_layout(f) {
            return Err(CoreError::LayoutMismatch(
                "ensemble members live on different layouts".into(),
            ));
        }
    }
    Ok(())
}

/// Pointwise mean over an ensemble of fields on a shared layout.
pub fn mean_field(fields: &[Field]) -> Result<Field> {
    check_ensemble(fields, 1)?;
    let mut out = Field::zeros(fields[0].layout().clone(), fields[0].time);
    for f in fields {
        out.add_scaled(f, 1.0)?;
    }
    // Sum first, divide once: one rounding per node fewer than accumulating
    // pre-scaled terms, and constant ensembles average back to their
    // constant whenever the partial sums stay representable. A true
    // division, because multiplying by the reciprocal reintroduces a
    // rounding exactly where the sum came out clean.
    let n = fields.len() as f64;
    for v in out.values_mut() {
        *v /= n;
    }
    Ok(out)
}

/// Pointwise unbiased variance over an ensemble of fields.
pub fn variance_field(fields: &[Field]) -> Result<Field> {
    check_ensemble(fields, 2)?;
    let m = mean_field(fields)?;
    let mut out = Field::zeros(fields[0].layout().clone(), fields[0].time);
    let inv = 1.0 / (fields.len() - 1) as f64;
    for f in fields {
        for ((o, &x), &mu) in out.values_mut().iter_mut().zip(f.values()).zip(m.values()) {
            *o += inv * (x - mu) * (x - mu);
        }
    }
    Ok(out)
}

/// Pointwise unbiased covariance of two paired ensembles.
pub fn covariance_field(xs: &[Field], ys: &[Field]) -> Result<Field> {
    if xs.len() != ys.len() {
        return Err(invalid("covariance needs ensembles of equal length"));
    }
    check_ensemble(xs, 2)?;
    check_ensemble(ys, 2)?;
    if !xs[0].same_layout(&ys[0]) {
        return Err(CoreError::LayoutMismatch(
            "covariance ensembles live on different layouts".into(),
        ));
    }
    let mx = mean_field(xs)?;
    let my = mean_field(ys)?;
    let mut out = Field::zeros(xs[0].layout().clone(), xs[0].time);
    let inv = 1.0 / (xs.len() - 1) as f64;
    for (x, y) in xs.iter().zip(ys) {
        for (((o, &a), &b), (&ma, &mb)) in out
            .values_mut()
            .iter_mut()
            .zip(x.values())
            .zip(y.values())
            .zip(mx.values().iter().zip(my.values()))
        {
            *o += inv * (a - ma) * (b - mb);
        }
    }
    Ok(out)
}
