use crate::error::{invalid, Result};
use crate::field::Field;

/// Discrete L2 norm of `values` with cell weights `weights`.
pub fn weighted_l2_norm(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(invalid("norm needs matching value/weight lists"));
    }
    Ok(values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * v * v)
        .sum::<f64>()
        .sqrt())
}

/// `||a - b||_2,w / ||b||_2,w`; the denominator must not vanish.
pub fn relative_l2_distance(a: &[f64], b: &[f64], weights: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid("relative distance needs equal-length inputs"));
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let num = weighted_l2_norm(&diff, weights)?;
    let den = weighted_l2_norm(b, weights)?;
    if den == 0.0 {
        return Err(invalid("relative distance against a zero reference"));
    }
    Ok(num / den)
}

/// Field convenience wrapper around [`relative_l2_distance`].
pub fn relative_l2_field(a: &Field, b: &Field) -> Result<f64> {
    if !a.same_layout(b) {
        return Err(invalid("relative distance needs fields on one layout"));
    }
    let w = a.layout().cell_weights();
    relative_l2_distance(a.values(), b.values(), &w)
}

/// L1 norm with the polynomial velocity weight `(1 + |v|)^2`:
/// `sum |f| (1+|v|)^2 dx dv`, where `|v|` is the Euclidean norm of the
/// velocity coordinates. Space-only fields use weight 1.
pub fn weighted_norm_l1_2(field: &Field) -> f64 {
    let nspace = field.layout().space_dims();
    let coords = field.layout().cell_coords();
    let weights = field.layout().cell_weights();
    field
        .values()
        .iter()
        .zip(&coords)
        .zip(&weights)
        .map(|((&f, c), &w)| {
            let vsq: f64 = c[nspace..].iter().map(|&v| v * v).sum();
            let poly = 1.0 + vsq.sqrt();
            f.abs() * poly * poly * w
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Axis, AxisKind, FieldLayout};
    use crate::grid::Grid1D;

    fn unit_phase_field(nx: usize, nv: usize) -> Field {
        let gx = Grid1D::new(0.0, 1.0, nx).unwrap();
        let gv = Grid1D::new(-1.0, 1.0, nv).unwrap();
        let layout = FieldLayout::new(vec![
            Axis::from_grid(AxisKind::Space, "x", &gx),
            Axis::from_grid(AxisKind::Velocity, "v", &gv),
        ])
        .unwrap();
        let mut f = Field::zeros(layout, 0.0);
        f.map_in_place(|_| 1.0);
        f
    }

    #[test]
    fn polynomial_weighted_norm_of_one_is_fourteen_thirds() {
        // Integral of (1+|v|)^2 over v in [-1,1] is 14/3; x-integral adds 1.
        let f = unit_phase_field(64, 4096);
        let got = weighted_norm_l1_2(&f);
        assert!((got - 14.0 / 3.0).abs() < 1e-3, "got {got}");
    }

    #[test]
    fn polynomial_weighted_norm_is_homogeneous() {
        let f = unit_phase_field(8, 32);
        let base = weighted_norm_l1_2(&f);
        let mut g = f.clone();
        g.scale(-2.5);
        assert!((weighted_norm_l1_2(&g) - 2.5 * base).abs() < 1e-12);
    }

    #[test]
    fn relative_distance_of_identical_inputs_is_zero() {
        let a = [1.0, 2.0, 3.0];
        let w = [0.5, 0.5, 0.5];
        assert_eq!(relative_l2_distance(&a, &a, &w).unwrap(), 0.0);
    }

    #[test]
    fn relative_distance_matches_hand_computation() {
        // ||a-b|| = sqrt(0.5*(1+1)) = 1, ||b|| = sqrt(0.5*(4+4)) = 2.
        let a = [3.0, 1.0];
        let b = [2.0, 2.0];
        let w = [0.5, 0.5];
        let got = relative_l2_distance(&a, &b, &w).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
    }
}
