use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;

/// Stream tag for parameter draws, so a parameter sample and a solver run
/// holding the same (seed, index) never consume the same random stream.
const PARAM_STREAM: u64 = 1;

/// 64-bit diffusion of the master seed (the splitmix64 finalizer). Keys
/// within one master stay a cheap add apart, but distinct masters land far
/// apart in key space: runs seeded 0, 1, 2, ... must not share substreams,
/// which raw addition would make them do for every index pair summing the
/// same way.
fn diffuse(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the generator of sample `index` under `master_seed`. Pass this
/// to a component that seeds its own generators; the diffusion guarantees
/// the derived key spaces of distinct masters stay disjoint in practice.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    diffuse(master_seed).wrapping_add(index)
}

/// Generator for sample `index` under `master_seed`; independent streams for
/// different indices and for different masters, reproducible across runs and
/// thread counts.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, index))
}

fn param_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = substream(master_seed, index);
    rng.set_stream(PARAM_STREAM);
    rng
}

/// Uniform box in parameter space; the only supported law is uniform
/// because every experiment here uses one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpace {
    bounds: Vec<(f64, f64)>,
}

impl ParamSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(invalid("parameter space needs at least one dimension"));
        }
        for &(lo, hi) in &bounds {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(invalid(format!("bad parameter bounds ({lo}, {hi})")));
            }
        }
        Ok(Self { bounds })
    }

    /// `dim` copies of the interval `[lo, hi]`.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.bounds.len()
            && z.iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// `k` i.i.d. uniform draws; row `i` comes from substream `seed + i`, so
    /// the matrix is independent of evaluation order.
    pub fn sample_uniform(&self, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if k == 0 {
            return Err(invalid("sample count must be at least 1"));
        }
        Ok((0..k)
            .map(|i| {
                let mut rng = param_stream(seed, i as u64);
                self.bounds
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..hi))
                    .collect()
            })
            .collect())
    }
}

/// Random scattering coefficient `sigma(x, z) = 1 + 4 sum_i cos(2 pi i x)
/// z_i / (i pi)^2` over five modes; strictly positive on the box `[-1,1]^5`
/// because the coefficient series sums below 1/4.
pub fn eval_sigma_field(x: f64, z: &[f64]) -> Result<f64> {
    if z.len() != 5 {
        return Err(invalid(format!(
            "scattering field needs 5 parameters, got {}",
            z.len()
        )));
    }
    if z.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(invalid("scattering field parameters must lie in [-1, 1]"));
    }
    let mut s = 1.0;
    for (i, &zi) in z.iter().enumerate() {
        let k = (i + 1) as f64;
        s += 4.0 * (2.0 * PI * k * x).cos() * zi / (k * PI * (k * PI));
    }
    Ok(s)
}

/// Closed-form uncertain initial data for the test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcPreset {
    /// Two displaced Gaussian bumps in a 2-d velocity plane; z shifts both
    /// centers along the first velocity axis.
    TwoBumps,
    /// Sod tube at Maxwellian equilibrium with uncertain temperatures.
    Sod,
    /// Two drifting velocity humps with sine/cosine mode expansions in the
    /// densities and temperatures.
    TransportDoubleGaussian,
    /// Smooth density/temperature mode expansions (7 modes each) feeding a
    /// symmetric pair of 2-d Maxwellians.
    MixedRegimeKl,
    /// Gaussian infection bump: the infected-compartment datum of the
    /// epidemiographic tests; susceptible is `1 - I` with the same velocity
    /// profile and recovered starts at zero.
    SirGaussian,
}

impl FromStr for IcPreset {
    type Err = crate::error::CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-bumps" => Ok(Self::TwoBumps),
            "sod" => Ok(Self::Sod),
            "transport-double-gaussian" => Ok(Self::TransportDoubleGaussian),
            "mixed-regime-kl" => Ok(Self::MixedRegimeKl),
            "sir-gaussian" => Ok(Self::SirGaussian),
            other => Err(invalid(format!("unknown initial-condition preset '{other}'"))),
        }
    }
}

/// Normalized Maxwellian in `d = v.len()` dimensions.
fn maxwellian_nd(rho: f64, u: &[f64], t: f64, v: &[f64]) -> f64 {
    let d = v.len() as f64;
    let esq: f64 = v
        .iter()
        .enumerate()
        .map(|(i, &vi)| {
            let ui = u.get(i).copied().unwrap_or(0.0);
            (vi - ui) * (vi - ui)
        })
        .sum();
    rho / (2.0 * PI * t).powf(d / 2.0) * (-esq / (2.0 * t)).exp()
}

/// Half-average of `exp(-v^2/2)` over `[-1, 1]`, the continuum limit of the
/// velocity renormalization used by the epidemiographic solvers.
fn sir_velocity_mass() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let q = gauss_legendre(48).expect("fixed rule");
        0.5 * q.integrate(|v| (-v * v / 2.0).exp())
    })
}

/// Evaluate the preset initial datum at position `x`, velocity `v`,
/// parameter `z`. Axis counts are preset-specific and checked.
pub fn eval_kinetic_ic(preset: IcPreset, x: &[f64], v: &[f64], z: &[f64]) -> Result<f64> {
    match preset {
        IcPreset::TwoBumps => {
            if v.len() != 2 || z.len() != 1 {
                return Err(invalid("two-bumps expects 2 velocity axes and 1 parameter"));
            }
            if !(0.0..=1.0).contains(&z[0]) {
                return Err(invalid("two-bumps parameter must lie in [0, 1]"));
            }
            let (s, rho0, sigma) = (0.2, 0.125, 0.5);
            let c = 2.0 + s * z[0];
            let cm = 1.0 + s * z[0];
            let d1 = (v[0] - c) * (v[0] - c) + v[1] * v[1];
            let d2 = (v[0] + cm) * (v[0] + cm) + v[1] * v[1];
            Ok(rho0 / (2.0 * PI) * ((-d1 / sigma).exp() + (-d2 / sigma).exp()))
        }
        IcPreset::Sod => {
            if x.len() != 1 || v.is_empty() || z.len() != 1 {
                return Err(invalid("sod expects 1 space axis, >=1 velocity axes, 1 parameter"));
            }
            if !(0.0..=1.0).contains(&z[0]) {
                return Err(invalid("sod parameter must lie in [0, 1]"));
            }
            let s = 0.25;
            let (rho, t) = if x[0] < 0.5 {
                (1.0, 1.0 + s * z[0])
            } else {
                (0.125, 0.8 + s * z[0])
            };
            Ok(maxwellian_nd(rho, &[], t, v))
        }
        IcPreset::TransportDoubleGaussian => {
            if x.len() != 1 || v.len() != 1 || z.len() != 5 {
                return Err(invalid(
                    "transport-double-gaussian expects 1 space axis, 1 velocity axis, 5 parameters",
                ));
            }
            if z.iter().any(|p| !(-1.0..=1.0).contains(p)) {
                return Err(invalid("transport-double-gaussian parameters must lie in [-1, 1]"));
            }
            let (xx, vv) = (x[0], v[0]);
            let mut rho0 = 1.0;
            let mut rho1 = 1.0;
            for (k, &zk) in z.iter().enumerate() {
                let kf = (k + 1) as f64;
                let kpi2 = kf * PI * (kf * PI);
                rho0 += 3.0 * (2.0 * PI * kf * xx).sin() * zk / kpi2;
                rho1 += 2.0 * (2.0 * PI * kf * xx).cos() * zk / kpi2;
            }
            let t0 = (5.0 + 2.0 * (2.0 * PI * xx).cos()) / 20.0 * (1.0 + 0.6 * z[0]);
            let t1 = 0.5 + 0.2 * (2.0 * PI * xx).cos() * z[1];
            let g0 = (-((vv - 0.5) / t0) * ((vv - 0.5) / t0)).exp();
            let g1 = (-((vv + 0.75) / t1) * ((vv + 0.75) / t1)).exp();
            Ok(rho0 * g0 + rho1 * g1)
        }
        IcPreset::MixedRegimeKl => {
            if x.len() != 1 || v.len() != 2 || z.len() < 14 {
                return Err(invalid(
                    "mixed-regime-kl expects 1 space axis, 2 velocity axes, >=14 parameters",
                ));
            }
            if z.iter().any(|p| !(-1.0..=1.0).contains(p)) {
                return Err(invalid("mixed-regime-kl parameters must lie in [-1, 1]"));
            }
            let xx = x[0];
            let mut rho = 2.0 + (2.0 * PI * xx).sin();
            let mut t = 3.0 + (2.0 * PI * xx).cos();
            for k in 1..=7usize {
                let kf = k as f64;
                let phase = 2.0 * PI * (kf + 1.0) * xx;
                rho += 0.2 * phase.sin() * z[k - 1] / (2.0 * kf);
                t += 0.2 * phase.cos() * z[7 + k - 1] / (2.0 * kf);
            }
            rho /= 3.0;
            t /= 4.0;
            let u = [0.2, 0.0];
            // Symmetric pair of drifting Maxwellians, each carrying rho/2.
            let plus = maxwellian_nd(rho / 2.0, &u, t, v);
            let minus = maxwellian_nd(rho / 2.0, &[-u[0], -u[1]], t, v);
            Ok(plus + minus)
        }
        IcPreset::SirGaussian => {
            if x.len() != 1 || v.len() != 1 {
                return Err(invalid("sir-gaussian expects 1 space axis and 1 velocity axis"));
            }
            let i0 = 0.01 * (-(x[0] - 10.0) * (x[0] - 10.0)).exp();
            Ok(i0 * (-v[0] * v[0] / 2.0).exp() / sir_velocity_mass())
        }
    }
}
