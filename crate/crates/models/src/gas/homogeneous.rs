//! Exact solution of space-homogeneous relaxation towards equilibrium:
//! `f(t) = e^(-nu t) f0 + (1 - e^(-nu t)) M[f0]`, where `M[f0]` is the
//! Maxwellian sharing the conserved moments of `f0`.

use kinuq_core::field::Field;

use crate::error::{config, Result};
use crate::gas::{maxwellian, moments};

/// Discrete Maxwellian with the moments of `f0`, on `f0`'s layout.
pub fn equilibrium_of(f0: &Field) -> Result<Field> {
    let m = moments(f0)?;
    let coords = f0.layout().cell_coords();
    let mut out = Field::zeros(f0.layout().clone(), f0.time);
    for (o, c) in out.values_mut().iter_mut().zip(&coords) {
        *o = maxwellian(&m, c)?;
    }
    Ok(out)
}

/// Exact homogeneous relaxation propagator. Both terms live on the same
/// quadrature, so the discrete conserved moments of the output match those
/// of `f0` up to the quadrature accuracy of the Gaussian tail.
pub fn bgk_homogeneous_exact(f0: &Field, nu: f64, t: f64) -> Result<Field> {
    if !(nu > 0.0) {
        return Err(config(format!("collision frequency must be positive, got {nu}")));
    }
    if !(t >= 0.0) {
        return Err(config(format!("time must be nonnegative, got {t}")));
    }
    let decay = (-nu * t).exp();
    let mut out = equilibrium_of(f0)?;
    out.scale(1.0 - decay);
    out.add_scaled(f0, decay)?;
    out.time = f0.time + t;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::tests::{discrete_maxwellian, velocity_layout_2d};
    use crate::gas::{entropy, MomentSet};
    use kinuq_core::random::{eval_kinetic_ic, IcPreset};

    fn two_bumps_field(z: f64) -> Field {
        // The equilibrium Maxwellian has T near 1.6, so the box must reach
        // past |v| = 8 for its tail to be negligible.
        let layout = velocity_layout_2d(48, 10.0);
        let coords = layout.cell_coords();
        let values = coords
            .iter()
            .map(|c| eval_kinetic_ic(IcPreset::TwoBumps, &[], c, &[z]).unwrap())
            .collect();
        Field::from_values(layout, 0.0, values).unwrap()
    }

    #[test]
    fn zero_time_returns_the_initial_datum() {
        let f0 = two_bumps_field(0.3);
        let f = bgk_homogeneous_exact(&f0, 1.0, 0.0).unwrap();
        for (a, b) in f.values().iter().zip(f0.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn long_time_limit_is_the_equilibrium() {
        let f0 = two_bumps_field(0.0);
        let eq = equilibrium_of(&f0).unwrap();
        let f = bgk_homogeneous_exact(&f0, 1.0, 100.0).unwrap();
        let max: f64 = f
            .values()
            .iter()
            .zip(eq.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-10, "max deviation {max}");
    }

    #[test]
    fn conserved_moments_are_time_invariant() {
        let f0 = two_bumps_field(0.7);
        let m0 = moments(&f0).unwrap();
        for &t in &[0.1, 0.5, 2.0, 10.0] {
            let f = bgk_homogeneous_exact(&f0, 1.0, t).unwrap();
            let m = moments(&f).unwrap();
            assert!((m.rho - m0.rho).abs() < 1e-9);
            assert!((m.u[0] - m0.u[0]).abs() < 1e-9);
            assert!((m.energy - m0.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn propagator_is_linear_in_the_relaxation_weights() {
        // f(t) must equal e^(-nu t) f0 + (1 - e^(-nu t)) M exactly.
        let f0 = two_bumps_field(1.0);
        let eq = equilibrium_of(&f0).unwrap();
        let t = 0.8;
        let w = (-t_times_nu(1.3, t)).exp();
        let f = bgk_homogeneous_exact(&f0, 1.3, t).unwrap();
        for ((&got, &a), &b) in f.values().iter().zip(f0.values()).zip(eq.values()) {
            assert!((got - (w * a + (1.0 - w) * b)).abs() < 1e-14);
        }
    }

    fn t_times_nu(nu: f64, t: f64) -> f64 {
        nu * t
    }

    #[test]
    fn entropy_decreases_along_the_trajectory() {
        let f0 = two_bumps_field(0.5);
        let mut last = entropy(&f0);
        for &t in &[0.2, 0.5, 1.0, 2.0, 5.0] {
            let h = entropy(&bgk_homogeneous_exact(&f0, 1.0, t).unwrap());
            assert!(h <= last + 1e-12, "entropy rose at t={t}");
            last = h;
        }
    }

    #[test]
    fn gaussian_input_is_a_fixed_point() {
        let layout = velocity_layout_2d(40, 8.0);
        let m = MomentSet::from_primitive(0.5, vec![0.3, -0.1], 0.8);
        let f0 = discrete_maxwellian(&layout, &m);
        let f = bgk_homogeneous_exact(&f0, 2.0, 1.5).unwrap();
        for (a, b) in f.values().iter().zip(f0.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
