use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::field::{Axis, AxisKind, Field, FieldLayout};
use crate::grid::Grid1D;

/// How to treat particles that fall outside the histogram domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfRange {
    /// Count them in the nearest end cell.
    #[default]
    Clamp,
    /// Drop them and normalize by the retained count.
    Reject,
}

/// Layout of a histogram over `grid`, shared by all reconstructions on it.
pub fn histogram_layout(label: &str, grid: &Grid1D) -> Arc<FieldLayout> {
    FieldLayout::new(vec![Axis::from_grid(AxisKind::Velocity, label, grid)])
        .expect("single-axis layout is always valid")
}

/// Piecewise-constant density estimate `counts / (N * dw)` from particle
/// positions; integrates to 1 exactly.
pub fn histogram_reconstruct(
    particles: &[f64],
    grid: &Grid1D,
    layout: &Arc<FieldLayout>,
    mode: OutOfRange,
) -> Result<Field> {
    if particles.is_empty() {
        return Err(invalid("histogram of an empty particle set"));
    }
    let mut counts = vec![0u64; grid.n_cells()];
    let mut kept = 0u64;
    for &p in particles {
        if !p.is_finite() {
            return Err(invalid("histogram input contains a non-finite position"));
        }
        match mode {
            OutOfRange::Clamp => {
                counts[grid.cell_of_clamped(p)] += 1;
                kept += 1;
            }
            OutOfRange::Reject => {
                if p >= grid.x_min() && p <= grid.x_max() {
                    counts[grid.cell_of_clamped(p)] += 1;
                    kept += 1;
                }
            }
        }
    }
    if kept == 0 {
        return Err(invalid("every particle fell outside the histogram domain"));
    }
    let scale = 1.0 / (kept as f64 * grid.spacing());
    let values = counts.iter().map(|&c| c as f64 * scale).collect();
    Field::from_values(layout.clone(), 0.0, values)
}
