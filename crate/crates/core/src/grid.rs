use crate::error::{invalid, Result};

/// Uniform cell-centered 1D grid on `[x_min, x_max]`.
///
/// Cell `i` is centered at `x_min + (i + 1/2) * spacing()`; finite-volume
/// solvers treat values as cell averages and quadratures weight each cell by
/// the spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(invalid("grid bounds must be finite"));
        }
        if x_max <= x_min {
            return Err(invalid(format!(
                "grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells == 0 {
            return Err(invalid("grid needs at least one cell"));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_cells);
        self.x_min + (i as f64 + 0.5) * self.spacing()
    }

    /// Left face of cell `i`; `face(n_cells)` is the right domain boundary.
    pub fn face(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        self.x_min + i as f64 * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Extent of the domain, `x_max - x_min`.
    pub fn extent(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Index of the cell containing `x`, clamping to the boundary cells.
    pub fn cell_of_clamped(&self, x: f64) -> usize {
        let raw = ((x - self.x_min) / self.spacing()).floor();
        if raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.n_cells - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_offset_by_half_a_cell() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.centers(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.face(0), 0.0);
        assert_eq!(g.face(4), 1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(0.0, 0.0, 4).is_err());
        assert!(Grid1D::new(1.0, 0.0, 4).is_err());
        assert!(Grid1D::new(0.0, 1.0, 0).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn clamped_lookup_covers_the_line() {
        let g = Grid1D::new(-1.0, 1.0, 10).unwrap();
        assert_eq!(g.cell_of_clamped(-5.0), 0);
        assert_eq!(g.cell_of_clamped(5.0), 9);
        assert_eq!(g.cell_of_clamped(-0.999), 0);
        assert_eq!(g.cell_of_clamped(0.999), 9);
    }
}
