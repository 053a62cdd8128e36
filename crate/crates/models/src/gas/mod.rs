//! Rarefied-gas hierarchy: Maxwellian closure and moment extraction shared
//! by the exact homogeneous relaxation propagator, the particle collision
//! engine, the 1-d kinetic solver and its fluid limit.

pub mod bgk1d;
pub mod dsmc;
pub mod euler1d;
pub mod homogeneous;

use std::f64::consts::PI;

use kinuq_core::field::Field;

use crate::error::{config, ModelError, Result};

/// Conserved moments of a velocity distribution in `d_v` dimensions.
///
/// `energy` is the full second moment `<|v|^2/2 f>`; temperature follows
/// from `T = (2E - rho |u|^2) / (d_v rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub rho: f64,
    pub u: Vec<f64>,
    pub energy: f64,
}

impl MomentSet {
    pub fn new(rho: f64, u: Vec<f64>, energy: f64) -> Self {
        Self { rho, u, energy }
    }

    pub fn d_v(&self) -> usize {
        self.u.len()
    }

    pub fn temperature(&self) -> f64 {
        if self.rho <= 0.0 {
            return 0.0;
        }
        let usq: f64 = self.u.iter().map(|&ui| ui * ui).sum();
        (2.0 * self.energy - self.rho * usq) / (self.d_v() as f64 * self.rho)
    }

    /// Moments of a rest-frame state given `(rho, u, T)`.
    pub fn from_primitive(rho: f64, u: Vec<f64>, t: f64) -> Self {
        let usq: f64 = u.iter().map(|&ui| ui * ui).sum();
        let d = u.len() as f64;
        let energy = 0.5 * rho * (usq + d * t);
        Self { rho, u, energy }
    }
}

/// Collision frequency law: constant, or the density/temperature power law
/// `nu = C rho T^(1-eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuModel {
    Constant(f64),
    PowerLaw { c: f64, eta: f64 },
}

impl NuModel {
    pub fn eval(&self, rho: f64, t: f64) -> f64 {
        match *self {
            NuModel::Constant(nu) => nu,
            NuModel::PowerLaw { c, eta } => c * rho * t.powf(1.0 - eta),
        }
    }
}

/// Relaxation configuration for the kinetic solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgkConfig {
    pub epsilon: f64,
    pub nu: NuModel,
}

impl BgkConfig {
    pub fn new(epsilon: f64, nu: NuModel) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(config(format!("epsilon must be positive, got {epsilon}")));
        }
        match nu {
            NuModel::Constant(v) if v <= 0.0 => {
                return Err(config("collision frequency must be positive"));
            }
            NuModel::PowerLaw { c, .. } if c <= 0.0 => {
                return Err(config("collision frequency prefactor must be positive"));
            }
            _ => {}
        }
        Ok(Self { epsilon, nu })
    }
}

/// Maxwellian equilibrium value at velocity `v`:
/// `rho / (2 pi T)^(d_v/2) * exp(-|v - u|^2 / (2T))`.
pub fn maxwellian(m: &MomentSet, v: &[f64]) -> Result<f64> {
    if m.rho == 0.0 {
        return Ok(0.0);
    }
    let t = m.temperature();
    if !(t > 0.0) {
        return Err(ModelError::DegenerateState(format!(
            "Maxwellian needs positive temperature, got {t}"
        )));
    }
    let d = m.d_v() as f64;
    let esq: f64 = v
        .iter()
        .zip(&m.u)
        .map(|(&vi, &ui)| (vi - ui) * (vi - ui))
        .sum();
    Ok(m.rho / (2.0 * PI * t).powf(d / 2.0) * (-esq / (2.0 * t)).exp())
}

/// Moments of a velocity-only field.
pub fn moments(f: &Field) -> Result<MomentSet> {
    if f.layout().space_dims() != 0 {
        return Err(config("moments expects a velocity-only field"));
    }
    Ok(moments_per_cell(f)?.remove(0))
}

/// Moments of `f` in every spatial cell (one entry for velocity-only input).
pub fn moments_per_cell(f: &Field) -> Result<Vec<MomentSet>> {
    let d_v = f.layout().velocity_dims();
    if d_v == 0 {
        return Err(config("moments need at least one velocity axis"));
    }
    let rho = f.velocity_moment(|_| 1.0)?;
    let mut momenta = Vec::with_capacity(d_v);
    for k in 0..d_v {
        momenta.push(f.velocity_moment(|v| v[k])?);
    }
    let energy = f.velocity_moment(|v| 0.5 * v.iter().map(|&vi| vi * vi).sum::<f64>())?;
    let mut out = Vec::with_capacity(rho.len());
    for i in 0..rho.len() {
        let r = rho.values()[i];
        let u = momenta
            .iter()
            .map(|m| if r != 0.0 { m.values()[i] / r } else { 0.0 })
            .collect();
        out.push(MomentSet::new(r, u, energy.values()[i]));
    }
    Ok(out)
}

/// Per-cell temperature of a phase-space field, on the space-only layout.
pub fn temperature_field(f: &Field) -> Result<Field> {
    let cells = moments_per_cell(f)?;
    let mut out = f.velocity_moment(|_| 1.0)?;
    for (o, m) in out.values_mut().iter_mut().zip(&cells) {
        *o = m.temperature();
    }
    Ok(out)
}

/// Per-cell density of a phase-space field.
pub fn density_field(f: &Field) -> Result<Field> {
    Ok(f.velocity_moment(|_| 1.0)?)
}

/// Per-cell mean velocity along axis `k`.
pub fn mean_velocity_field(f: &Field, k: usize) -> Result<Field> {
    if k >= f.layout().velocity_dims() {
        return Err(config("velocity axis index out of range"));
    }
    let rho = f.velocity_moment(|_| 1.0)?;
    let mut mom = f.velocity_moment(|v| v[k])?;
    for (m, &r) in mom.values_mut().iter_mut().zip(rho.values()) {
        if r != 0.0 {
            *m /= r;
        }
    }
    Ok(mom)
}

/// Specific centered fourth moment `<|v - u|^4 f> / rho` of a velocity-only
/// field; the scalar tracked by the homogeneous relaxation tests.
pub fn centered_fourth_moment(f: &Field) -> Result<f64> {
    let m = moments(f)?;
    if m.rho == 0.0 {
        return Err(ModelError::DegenerateState("fourth moment of a vacuum".into()));
    }
    let u = m.u.clone();
    let raw = f.velocity_moment(move |v| {
        let esq: f64 = v
            .iter()
            .zip(&u)
            .map(|(&vi, &ui)| (vi - ui) * (vi - ui))
            .sum();
        esq * esq
    })?;
    Ok(raw.values()[0] / m.rho)
}

/// Discrete `int f log f` over the whole phase space; cells at or below the
/// positivity floor 1e-300 are skipped.
pub fn entropy(f: &Field) -> f64 {
    let weights = f.layout().cell_weights();
    f.values()
        .iter()
        .zip(&weights)
        .filter(|(&v, _)| v > 1e-300)
        .map(|(&v, &w)| w * v * v.ln())
        .sum()
}
