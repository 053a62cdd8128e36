//! Direct simulation of homogeneous Maxwell-molecule collisions: pairs are
//! drawn uniformly at a velocity-independent rate and scattered into a
//! uniformly random direction, so each particle collides once per unit time
//! on average.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config, Result};

/// Stochastic rounding: `floor(x) + 1` with probability `frac(x)`.
pub fn sround(x: f64, rng: &mut impl Rng) -> u64 {
    let base = x.floor();
    let frac = x - base;
    base as u64 + u64::from(rng.random::<f64>() < frac)
}

/// One collision step of length `dt` over 2-d velocities, in place.
///
/// `Sround(N dt / 2)` disjoint pairs (capped at `N/2`) are selected
/// uniformly and scattered elastically. Pairwise momentum and energy are
/// conserved exactly; the particle count never changes.
pub fn dsmc_maxwell_step(
    particles: &mut [[f64; 2]],
    dt: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    let n = particles.len();
    if n < 2 {
        return Err(config("collision step needs at least two particles"));
    }
    if !(0.0..=2.0).contains(&dt) {
        return Err(config(format!(
            "collision step length {dt} outside [0, 2]"
        )));
    }
    let n_c = (sround(n as f64 * dt / 2.0, rng) as usize).min(n / 2);
    if n_c == 0 {
        return Ok(());
    }
    // Partial Fisher-Yates: the first 2*n_c slots become a uniform draw of
    // disjoint indices.
    let mut idx: Vec<usize> = (0..n).collect();
    for k in 0..(2 * n_c) {
        let j = k + rng.random_range(0..n - k);
        idx.swap(k, j);
    }
    for m in 0..n_c {
        let (i, j) = (idx[2 * m], idx[2 * m + 1]);
        let (vi, vj) = (particles[i], particles[j]);
        let c = [(vi[0] + vj[0]) / 2.0, (vi[1] + vj[1]) / 2.0];
        let r = ((vi[0] - vj[0]).powi(2) + (vi[1] - vj[1]).powi(2)).sqrt();
        let theta = rng.random_range(0.0..2.0 * PI);
        let (s, co) = theta.sin_cos();
        let half = [r / 2.0 * co, r / 2.0 * s];
        particles[i] = [c[0] + half[0], c[1] + half[1]];
        particles[j] = [c[0] - half[0], c[1] - half[1]];
    }
    Ok(())
}

/// March the collision process to `t_end` with steps of at most `dt`.
pub fn dsmc_maxwell_run(
    particles: &mut [[f64; 2]],
    dt: f64,
    t_end: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(config("collision run needs dt > 0 and t_end >= 0"));
    }
    let mut t = 0.0;
    while t < t_end - 1e-12 {
        let step = dt.min(t_end - t);
        dsmc_maxwell_step(particles, step, rng)?;
        t += step;
    }
    Ok(())
}

/// Sample mean, temperature and centered fourth moment of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: [f64; 2],
    pub temperature: f64,
    pub m4: f64,
}

pub fn sample_moments(particles: &[[f64; 2]]) -> Result<SampleMoments> {
    if particles.is_empty() {
        return Err(config("moments of an empty ensemble"));
    }
    let n = particles.len() as f64;
    let mut mean = [0.0, 0.0];
    for p in particles {
        mean[0] += p[0];
        mean[1] += p[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for p in particles {
        let d = (p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2);
        m2 += d;
        m4 += d * d;
    }
    Ok(SampleMoments {
        mean,
        // 2-d: <|v-u|^2> = 2T.
        temperature: m2 / n / 2.0,
        m4: m4 / n,
    })
}

/// Draw `n` velocities from the displaced two-bump mixture: each particle
/// joins one of two isotropic Gaussians (variance sigma/2 per axis) centered
/// at `(2 + s z, 0)` and `(-(1 + s z), 0)`, with equal probability.
pub fn sample_two_bumps(n: usize, z: f64, rng: &mut impl Rng) -> Result<Vec<[f64; 2]>> {
    if n == 0 {
        return Err(config("ensemble size must be positive"));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(config("two-bumps parameter must lie in [0, 1]"));
    }
    let (s, sigma) = (0.2, 0.5_f64);
    let std = (sigma / 2.0).sqrt();
    let centers = [[2.0 + s * z, 0.0], [-(1.0 + s * z), 0.0]];
    Ok((0..n)
        .map(|_| {
            let c = centers[usize::from(rng.random::<f64>() < 0.5)];
            let gx: f64 = rng.sample(StandardNormal);
            let gy: f64 = rng.sample(StandardNormal);
            [c[0] + std * gx, c[1] + std * gy]
        })
        .collect())
}

/// Closed-form centered fourth moment of the two-bump datum under the
/// collision dynamics above, used as an independent reference.
///
/// With bump half-separation `a = 1.5 + 0.2 z` and width `sigma = 0.5`, the
/// centered second-moment tensor relaxes as `e^(-t/2)` towards `T I` with
/// `2T = a^2 + sigma`, and the centered fourth moment obeys
/// `dm4/dt = -m4/4 + (3/4)(2T)^2 - |P|_F^2/2`, giving
/// `m4(t) = 8T^2 + (a^4/3) e^(-t) - (4 a^4/3) e^(-t/4)`.
pub fn two_bumps_m4_reference(z: f64, t: f64) -> f64 {
    let a = 1.5 + 0.2 * z;
    let sigma = 0.5;
    let twot = a * a + sigma;
    let a4 = a.powi(4);
    2.0 * twot * twot + a4 / 3.0 * (-t).exp() - 4.0 * a4 / 3.0 * (-t / 4.0).exp()
}
