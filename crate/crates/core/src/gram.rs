use nalgebra::DMatrix;

use crate::error::{invalid, CoreError, Result};
use crate::field::Field;

/// Discrete inner product used to build Gramians of solution ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerProduct {
    /// Quadrature-weighted L2 product on the field layout.
    #[default]
    GridWeightedL2,
    /// Plain dot product of the raw value vectors.
    Euclidean,
}

impl InnerProduct {
    pub fn apply(&self, a: &Field, b: &Field) -> Result<f64> {
        match self {
            InnerProduct::GridWeightedL2 => a.weighted_dot(b),
            InnerProduct::Euclidean => {
                if !a.same_layout(b) {
                    return Err(CoreError::LayoutMismatch(
                        "inner product needs fields on one layout".into(),
                    ));
                }
                Ok(a.values().iter().zip(b.values()).map(|(&x, &y)| x * y).sum())
            }
        }
    }
}

/// Gramian `G_ij = <u_i, u_j>` of an ensemble, exactly symmetric because each
/// pair is evaluated once.
pub fn gram_matrix(fields: &[Field], inner: InnerProduct) -> Result<DMatrix<f64>> {
    if fields.is_empty() {
        return Err(invalid("gram_matrix needs at least one field"));
    }
    let n = fields.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner.apply(&fields[i], &fields[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Result of a pivoted (greedy) Cholesky factorization.
///
/// `factor` is N x rank in the original row order, so `factor * factor^T`
/// approximates the input matrix without any permutation bookkeeping;
/// `selection` lists the pivot rows in the order they were chosen.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    pub selection: Vec<usize>,
    pub factor: DMatrix<f64>,
    pub rank: usize,
}

impl PivotedCholesky {
    /// Full permutation: the selection order followed by the unselected
    /// indices in ascending order.
    pub fn permutation(&self, n: usize) -> Vec<usize> {
        let mut perm = self.selection.clone();
        let mut chosen = vec![false; n];
        for &i in &self.selection {
            chosen[i] = true;
        }
        perm.extend((0..n).filter(|&i| !chosen[i]));
        perm
    }

    pub fn reconstruction(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }
}

/// Pivoted Cholesky of a symmetric PSD matrix, stopping at rank `m` or
/// earlier once the residual diagonal falls below `1e-12 * max diag`.
///
/// At every step the pivot maximizes the residual diagonal, which is the
/// squared distance of that column to the span of the columns already
/// chosen; exact ties go to the lowest index. A residual diagonal below
/// `-1e-10 * max diag` means the input was not PSD.
pub fn pivoted_cholesky(g: &DMatrix<f64>, m: usize) -> Result<PivotedCholesky> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return Err(invalid("pivoted_cholesky needs a square, non-empty matrix"));
    }
    if m == 0 || m > n {
        return Err(invalid(format!("target rank {m} outside 1..={n}")));
    }
    let max_abs = g.amax();
    if max_abs > 0.0 {
        for i in 0..n {
            for j in (i + 1)..n {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-10 * max_abs {
                    return Err(invalid("pivoted_cholesky needs a symmetric matrix"));
                }
            }
        }
    }

    let mut diag: Vec<f64> = (0..n).map(|i| g[(i, i)]).collect();
    let max_diag = diag.iter().cloned().fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut factor = DMatrix::zeros(n, m);
    let mut selection = Vec::with_capacity(m);
    let mut taken = vec![false; n];

    for k in 0..m {
        // Greedy pivot: largest residual diagonal, lowest index on ties.
        let mut pivot = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if !taken[i] && diag[i] > best {
                best = diag[i];
                pivot = i;
            }
        }
        if best < -1e-10 * max_diag {
            return Err(CoreError::NotPositiveSemiDefinite {
                index: pivot,
                value: best,
            });
        }
        if best <= 1e-12 * max_diag {
            factor = factor.columns(0, k).into_owned();
            return Ok(PivotedCholesky {
                selection,
                factor,
                rank: k,
            });
        }
        let piv_sqrt = best.sqrt();
        factor[(pivot, k)] = piv_sqrt;
        for i in 0..n {
            if taken[i] || i == pivot {
                continue;
            }
            let mut s = g[(i, pivot)];
            for j in 0..k {
                s -= factor[(i, j)] * factor[(pivot, j)];
            }
            let lik = s / piv_sqrt;
            factor[(i, k)] = lik;
            diag[i] -= lik * lik;
        }
        diag[pivot] = 0.0;
        taken[pivot] = true;
        selection.push(pivot);
    }

    Ok(PivotedCholesky {
        selection,
        factor,
        rank: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLayout;
    use std::sync::Arc;

    fn vector_field(layout: &Arc<FieldLayout>, values: &[f64]) -> Field {
        Field::from_values(layout.clone(), 0.0, values.to_vec()).unwrap()
    }

    fn euclid_layout(n: usize) -> Arc<FieldLayout> {
        use crate::field::{Axis, AxisKind};
        use crate::grid::Grid1D;
        let g = Grid1D::new(0.0, n as f64, n).unwrap();
        FieldLayout::new(vec![Axis::from_grid(AxisKind::Space, "x", &g)]).unwrap()
    }

    #[test]
    fn gramian_of_orthonormal_columns_is_identity() {
        let layout = euclid_layout(3);
        let fields = vec![
            vector_field(&layout, &[1.0, 0.0, 0.0]),
            vector_field(&layout, &[0.0, 1.0, 0.0]),
            vector_field(&layout, &[0.0, 0.0, 1.0]),
        ];
        let g = gram_matrix(&fields, InnerProduct::Euclidean).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3));
    }

    #[test]
    fn gramian_matches_brute_force_dot_products() {
        let layout = euclid_layout(4);
        let raw = [
            [0.3, -1.0, 2.0, 0.1],
            [1.5, 0.2, -0.7, 0.9],
            [-0.4, 0.8, 0.8, -2.0],
        ];
        let fields: Vec<Field> = raw.iter().map(|r| vector_field(&layout, r)).collect();
        let g = gram_matrix(&fields, InnerProduct::Euclidean).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want: f64 = raw[i].iter().zip(&raw[j]).map(|(a, b)| a * b).sum();
                assert!((g[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn duplicated_column_makes_the_gramian_singular() {
        let layout = euclid_layout(2);
        let fields = vec![
            vector_field(&layout, &[1.0, 2.0]),
            vector_field(&layout, &[1.0, 2.0]),
        ];
        let g = gram_matrix(&fields, InnerProduct::Euclidean).unwrap();
        let eig = g.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min.abs() < 1e-12 * g.amax());
    }

    #[test]
    fn identity_pivots_in_index_order_on_ties() {
        let g = DMatrix::identity(4, 4);
        let pc = pivoted_cholesky(&g, 2).unwrap();
        assert_eq!(pc.selection, vec![0, 1]);
        assert_eq!(pc.rank, 2);
    }

    #[test]
    fn duplicate_vector_is_dropped_by_early_stop() {
        // Rows 0 and 2 are identical, so rank is 2 even when 3 is requested.
        let layout = euclid_layout(3);
        let fields = vec![
            vector_field(&layout, &[1.0, 0.0, 0.0]),
            vector_field(&layout, &[1.0, 1.0, 0.0]),
            vector_field(&layout, &[1.0, 0.0, 0.0]),
        ];
        let g = gram_matrix(&fields, InnerProduct::Euclidean).unwrap();
        let pc = pivoted_cholesky(&g, 3).unwrap();
        assert_eq!(pc.rank, 2);
        assert!(!pc.selection.contains(&2) || !pc.selection.contains(&0));
    }

    #[test]
    fn full_rank_factor_reconstructs_the_matrix() {
        // SPD matrix built as A^T A from a fixed full-rank A.
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let g = &a.transpose() * &a;
        let pc = pivoted_cholesky(&g, 3).unwrap();
        assert_eq!(pc.rank, 3);
        let err = (pc.reconstruction() - &g).amax();
        assert!(err <= 1e-10 * g.amax(), "reconstruction error {err}");
    }

    #[test]
    fn negative_diagonal_is_rejected_as_not_psd() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let res = pivoted_cholesky(&g, 2);
        assert!(matches!(
            res,
            Err(CoreError::NotPositiveSemiDefinite { index: 1, .. })
        ));
    }
}
