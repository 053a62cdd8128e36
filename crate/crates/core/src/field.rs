use std::sync::Arc;

use crate::error::{invalid, CoreError, Result};
use crate::grid::Grid1D;

/// What a field axis discretizes. Space axes must precede velocity axes so a
/// velocity block is contiguous in memory for every spatial cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Space,
    Velocity,
}

/// One discretized coordinate direction: node locations plus the quadrature
/// (or cell) weight attached to each node.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub label: String,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    pub fn new(kind: AxisKind, label: impl Into<String>, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(invalid("axis needs matching, non-empty node/weight lists"));
        }
        if nodes.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("axis nodes/weights".into()));
        }
        Ok(Self {
            kind,
            label: label.into(),
            nodes,
            weights,
        })
    }

    /// Cell-centered axis over a uniform grid; every weight is the spacing.
    pub fn from_grid(kind: AxisKind, label: impl Into<String>, grid: &Grid1D) -> Self {
        let dx = grid.spacing();
        Self {
            kind,
            label: label.into(),
            nodes: grid.centers(),
            weights: vec![dx; grid.n_cells()],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Shape shared by a family of fields: an ordered list of axes, stored
/// row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLayout {
    axes: Vec<Axis>,
}

impl FieldLayout {
    /// A layout with no axes holds a single scalar value.
    pub fn scalar() -> Arc<Self> {
        Arc::new(Self { axes: Vec::new() })
    }

    pub fn new(axes: Vec<Axis>) -> Result<Arc<Self>> {
        let mut seen_velocity = false;
        for ax in &axes {
            match ax.kind {
                AxisKind::Velocity => seen_velocity = true,
                AxisKind::Space if seen_velocity => {
                    return Err(invalid("space axes must precede velocity axes"));
                }
                AxisKind::Space => {}
            }
        }
        Ok(Arc::new(Self { axes }))
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of leading space axes.
    pub fn space_dims(&self) -> usize {
        self.axes.iter().filter(|a| a.kind == AxisKind::Space).count()
    }

    pub fn velocity_dims(&self) -> usize {
        self.axes.len() - self.space_dims()
    }

    /// Product of axis weights for every flat index, in layout order.
    pub fn cell_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for ax in &self.axes {
            let mut next = Vec::with_capacity(w.len() * ax.len());
            for &outer in &w {
                for &aw in ax.weights() {
                    next.push(outer * aw);
                }
            }
            w = next;
        }
        w
    }

    /// Node coordinates of every flat index, in layout order.
    pub fn cell_coords(&self) -> Vec<Vec<f64>> {
        let mut coords: Vec<Vec<f64>> = vec![Vec::new()];
        for ax in &self.axes {
            let mut next = Vec::with_capacity(coords.len() * ax.len());
            for outer in &coords {
                for &x in ax.nodes() {
                    let mut c = outer.clone();
                    c.push(x);
                    next.push(c);
                }
            }
            coords = next;
        }
        coords
    }

    /// Layout keeping only the space axes; the target of velocity moments.
    pub fn space_only(&self) -> Arc<Self> {
        Arc::new(Self {
            axes: self
                .axes
                .iter()
                .filter(|a| a.kind == AxisKind::Space)
                .cloned()
                .collect(),
        })
    }
}

/// A scalar field sampled on a `FieldLayout`, tagged with the solution time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    layout: Arc<FieldLayout>,
    pub time: f64,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(layout: Arc<FieldLayout>, time: f64) -> Self {
        let n = layout.len();
        Self {
            layout,
            time,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(layout: Arc<FieldLayout>, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(CoreError::LayoutMismatch(format!(
                "field has {} values, layout expects {}",
                values.len(),
                layout.len()
            )));
        }
        Ok(Self {
            layout,
            time,
            values,
        })
    }

    pub fn layout(&self) -> &Arc<FieldLayout> {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_layout(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout
    }

    fn check_layout(&self, other: &Field) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(CoreError::LayoutMismatch(
                "fields live on different layouts".into(),
            ))
        }
    }

    /// `self += alpha * other`, requiring matching layouts.
    pub fn add_scaled(&mut self, other: &Field, alpha: f64) -> Result<()> {
        self.check_layout(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64) {
        for v in &mut self.values {
            *v = f(*v);
        }
    }

    /// Quadrature-weighted integral over every axis.
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .zip(self.layout.cell_weights())
            .map(|(&v, w)| v * w)
            .sum()
    }

    /// Quadrature-weighted inner product `<self, other>`.
    pub fn weighted_dot(&self, other: &Field) -> Result<f64> {
        self.check_layout(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.layout.cell_weights())
            .map(|((&a, &b), w)| w * a * b)
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Integrate `weight(v) * f` over the velocity axes at every spatial
    /// cell, producing a field on the space-only layout. `weight` receives
    /// the velocity coordinates of one node.
    pub fn velocity_moment(&self, weight: impl Fn(&[f64]) -> f64) -> Result<Field> {
        let nspace = self.layout.space_dims();
        let space_layout = self.layout.space_only();
        let nx = space_layout.len();
        let vaxes: Vec<&Axis> = self.layout.axes()[nspace..].iter().collect();
        let vblock: usize = vaxes.iter().map(|a| a.len()).product();
        if nx * vblock != self.values.len() {
            return Err(CoreError::LayoutMismatch("inconsistent layout".into()));
        }
        // Velocity coordinates and weights for one contiguous block.
        let mut vcoords: Vec<Vec<f64>> = vec![Vec::new()];
        let mut vweights = vec![1.0];
        for ax in &vaxes {
            let mut nc = Vec::with_capacity(vcoords.len() * ax.len());
            let mut nw = Vec::with_capacity(vweights.len() * ax.len());
            for (c, &wo) in vcoords.iter().zip(&vweights) {
                for (&x, &w) in ax.nodes().iter().zip(ax.weights()) {
                    let mut cc = c.clone();
                    cc.push(x);
                    nc.push(cc);
                    nw.push(wo * w);
                }
            }
            vcoords = nc;
            vweights = nw;
        }
        let wf: Vec<f64> = vcoords
            .iter()
            .zip(&vweights)
            .map(|(c, &w)| w * weight(c))
            .collect();
        let mut out = Vec::with_capacity(nx);
        for i in 0..nx {
            let block = &self.values[i * vblock..(i + 1) * vblock];
            out.push(block.iter().zip(&wf).map(|(&f, &w)| f * w).sum());
        }
        Field::from_values(space_layout, self.time, out)
    }
}

/// `sum_k coeffs[k] * fields[k]` on a shared layout.
pub fn linear_combination(fields: &[&Field], coeffs: &[f64]) -> Result<Field> {
    if fields.is_empty() || fields.len() != coeffs.len() {
        return Err(invalid("linear_combination needs matching field/coeff lists"));
    }
    let mut out = Field::zeros(fields[0].layout().clone(), fields[0].time);
    for (f, &c) in fields.iter().zip(coeffs) {
        out.add_scaled(f, c)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn space_velocity_layout() -> Arc<FieldLayout> {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let q = gauss_legendre(8).unwrap();
        let (nodes, weights) = q.mapped_to(-1.0, 1.0);
        FieldLayout::new(vec![
            Axis::from_grid(AxisKind::Space, "x", &grid),
            Axis::new(AxisKind::Velocity, "v", nodes, weights).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn velocity_after_space_is_enforced() {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let bad = FieldLayout::new(vec![
            Axis::new(AxisKind::Velocity, "v", vec![0.0], vec![2.0]).unwrap(),
            Axis::from_grid(AxisKind::Space, "x", &grid),
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn integral_of_constant_is_measure_of_the_box() {
        let layout = space_velocity_layout();
        let mut f = Field::zeros(layout, 0.0);
        f.map_in_place(|_| 1.0);
        // |x-box| = 1, |v-box| = 2.
        assert!((f.integrate() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn velocity_moment_reduces_to_space_layout() {
        let layout = space_velocity_layout();
        let coords = layout.cell_coords();
        let values: Vec<f64> = coords.iter().map(|c| c[1] * c[1]).collect();
        let f = Field::from_values(layout, 0.0, values).unwrap();
        // Density moment of v^2 over [-1, 1] is 2/3 in every cell.
        let rho = f.velocity_moment(|_| 1.0).unwrap();
        assert_eq!(rho.len(), 4);
        for &r in rho.values() {
            assert!((r - 2.0 / 3.0).abs() < 1e-13);
        }
        // Second moment of v^2 is v^4 integrated: 2/5.
        let m2 = f.velocity_moment(|v| v[0] * v[0]).unwrap();
        for &r in m2.values() {
            assert!((r - 2.0 / 5.0).abs() < 1e-13);
        }
    }

    #[test]
    fn add_scaled_requires_matching_layouts() {
        let a_layout = space_velocity_layout();
        let grid = Grid1D::new(0.0, 1.0, 3).unwrap();
        let b_layout =
            FieldLayout::new(vec![Axis::from_grid(AxisKind::Space, "x", &grid)]).unwrap();
        let mut a = Field::zeros(a_layout, 0.0);
        let b = Field::zeros(b_layout, 0.0);
        assert!(a.add_scaled(&b, 1.0).is_err());
    }

    #[test]
    fn linear_combination_matches_hand_sum() {
        let layout = space_velocity_layout();
        let mut a = Field::zeros(layout.clone(), 0.0);
        a.map_in_place(|_| 1.0);
        let mut b = Field::zeros(layout, 0.0);
        b.map_in_place(|_| 3.0);
        let c = linear_combination(&[&a, &b], &[2.0, -1.0]).unwrap();
        for &v in c.values() {
            assert!((v - (-1.0)).abs() < 1e-15);
        }
    }
}
