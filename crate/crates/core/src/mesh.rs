//! Masked uniform Cartesian grid over the closed unit ball of ℝⁿ.
//!
//! Nodes sit on `[-1, 1]ⁿ` with spacing `h = 2 / (N - 1)` and a node at the
//! origin. Each node is classified by its distance to the origin:
//!
//! * `Interior`: `|x| < 1 - 2h` (the unknowns of the discrete problem),
//! * `Band`: `1 - 2h <= |x| <= 1` (carries Dirichlet data),
//! * `Exterior`: `|x| > 1`.
//!
//! Classification is done in integer arithmetic (`|x|² (N-1)²/4` is an integer
//! sum of squares), so it is exactly symmetric under axis reflections.

use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    Band,
    Exterior,
}

impl NodeClass {
    pub fn token(self) -> char {
        match self {
            NodeClass::Interior => 'I',
            NodeClass::Band => 'B',
            NodeClass::Exterior => 'E',
        }
    }

    pub fn from_token(c: char) -> Option<Self> {
        match c {
            'I' => Some(NodeClass::Interior),
            'B' => Some(NodeClass::Band),
            'E' => Some(NodeClass::Exterior),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscMesh {
    dim: usize,
    size: usize,
    h: f64,
    strides: Vec<usize>,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    ball: Vec<usize>,
    stencil: Vec<usize>,
}

impl DiscMesh {
    /// Builds the masked grid with `size` nodes per axis in dimension `dim`.
    pub fn new(dim: usize, size: usize) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArg(format!("dimension must be 2 or 3, got {dim}")));
        }
        if size % 2 == 0 {
            return Err(Error::InvalidArg(format!("nodes per axis must be odd, got {size}")));
        }
        // (N-1)/2 nodes per half-axis; |x| < 1 - 2h  <=>  Σm² < (c-2)².
        let c = (size as i64 - 1) / 2;
        if c <= 2 {
            return Err(Error::RejectedGeometry(format!(
                "N = {size} leaves no interior nodes (1 - 2h <= 0)"
            )));
        }
        if size < 9 {
            return Err(Error::InvalidArg(format!("nodes per axis must be at least 9, got {size}")));
        }
        let h = 2.0 / (size as f64 - 1.0);
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * size;
        }
        let total = size.pow(dim as u32);
        let outer = c * c;
        let inner = (c - 2) * (c - 2);
        let mut classes = Vec::with_capacity(total);
        let mut interior = Vec::new();
        let mut ball = Vec::new();
        let mut stencil = Vec::new();
        let mut idx = vec![0usize; dim];
        for node in 0..total {
            let mut rem = node;
            for axis in 0..dim {
                idx[axis] = rem / strides[axis];
                rem %= strides[axis];
            }
            let r2: i64 = idx.iter().map(|&k| (k as i64 - c).pow(2)).sum();
            let class = if r2 > outer {
                NodeClass::Exterior
            } else if r2 < inner {
                NodeClass::Interior
            } else {
                NodeClass::Band
            };
            classes.push(class);
            if class == NodeClass::Interior {
                interior.push(node);
            }
            if class != NodeClass::Exterior {
                ball.push(node);
                if idx.iter().all(|&k| k >= 1 && k + 1 < size) {
                    stencil.push(node);
                }
            }
        }
        Ok(Arc::new(DiscMesh {
            dim,
            size,
            h,
            strides,
            classes,
            interior,
            ball,
            stencil,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Quadrature weight `hⁿ` carried by every node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn node_count(&self) -> usize {
        self.classes.len()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    /// Indices of `Interior` nodes in ascending order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Indices of all nodes in the closed ball (`Interior` and `Band`).
    pub fn ball_nodes(&self) -> &[usize] {
        &self.ball
    }

    /// Ball nodes whose full Hessian stencil lies on the grid. This is the
    /// quadrature set of the energy; it omits only the 2n axis extremes.
    pub fn stencil_nodes(&self) -> &[usize] {
        &self.stencil
    }

    /// Radius of the interior zone, `1 - 2h`.
    pub fn interior_radius(&self) -> f64 {
        1.0 - 2.0 * self.h
    }

    pub fn same_grid(&self, other: &DiscMesh) -> bool {
        self.dim == other.dim && self.size == other.size
    }

    /// Writes the coordinates of `node` into `out[..dim]`.
    pub fn position_into(&self, node: usize, out: &mut [f64]) {
        let mut rem = node;
        for axis in 0..self.dim {
            let k = rem / self.strides[axis];
            rem %= self.strides[axis];
            out[axis] = -1.0 + k as f64 * self.h;
        }
    }

    pub fn position(&self, node: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        self.position_into(node, &mut out);
        out
    }

    /// Integer grid index of `node` along `axis`.
    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.size
    }

    fn check_point(&self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.dim {
            return Err(Error::InvalidArg(format!(
                "point has {} coordinates, mesh dimension is {}",
                x0.len(),
                self.dim
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArg("point coordinates must be finite".into()));
        }
        Ok(())
    }

    /// Ensures `B_r(x0)` stays inside the interior zone `|x| <= 1 - 2h`.
    pub fn check_region(&self, x0: &[f64], r: f64) -> Result<()> {
        self.check_point(x0)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArg(format!("radius must be positive, got {r}")));
        }
        let reach = norm(x0) + r;
        if reach > self.interior_radius() + 1e-12 {
            return Err(Error::RegionOutOfRange(format!(
                "ball of radius {r} around |x0| = {:.6} reaches {reach:.6} > 1 - 2h = {:.6}",
                norm(x0),
                self.interior_radius()
            )));
        }
        Ok(())
    }

    /// Node indices `i` with `|x_i - x0| <= r`, in ascending order.
    pub fn nodes_within(&self, x0: &[f64], r: f64) -> Vec<usize> {
        self.ball
            .iter()
            .copied()
            .filter(|&node| distance_to(self, node, x0) <= r)
            .collect()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn distance_to(mesh: &DiscMesh, node: usize, x0: &[f64]) -> f64 {
    let mut pos = [0.0; 3];
    mesh.position_into(node, &mut pos);
    x0.iter()
        .zip(pos.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// One real value per grid node. Values at `Exterior` nodes are carried along
/// (they hold the boundary datum's extension for fields built from a formula).
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<DiscMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(mesh: &Arc<DiscMesh>) -> Self {
        ScalarField {
            mesh: Arc::clone(mesh),
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn constant(mesh: &Arc<DiscMesh>, value: f64) -> Self {
        ScalarField {
            mesh: Arc::clone(mesh),
            values: vec![value; mesh.node_count()],
        }
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(mesh: &Arc<DiscMesh>, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let dim = mesh.dim();
        let mut pos = [0.0; 3];
        let values = (0..mesh.node_count())
            .map(|node| {
                mesh.position_into(node, &mut pos);
                f(&pos[..dim])
            })
            .collect();
        ScalarField {
            mesh: Arc::clone(mesh),
            values,
        }
    }

    pub fn from_values(mesh: &Arc<DiscMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidArg(format!(
                "field has {} values, mesh has {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value at node {i}")));
        }
        Ok(ScalarField {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    pub fn mesh(&self) -> &Arc<DiscMesh> {
        &self.mesh
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

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Maximum absolute difference over all nodes.
    pub fn sup_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_mesh(&self, mesh: &DiscMesh) -> Result<()> {
        if self.mesh.same_grid(mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch {
                expected_dim: mesh.dim(),
                expected_size: mesh.size(),
                dim: self.mesh.dim(),
                size: self.mesh.size(),
            })
        }
    }
}

/// Midpoint quadrature of `f` over `B_r(x0)`: `Σ_{|x_i - x0| <= r} f(x_i) hⁿ`.
pub fn integrate_ball(f: &ScalarField, x0: &[f64], r: f64) -> Result<f64> {
    let mesh = f.mesh();
    mesh.check_region(x0, r)?;
    let vol = mesh.cell_volume();
    Ok(mesh
        .ball_nodes()
        .iter()
        .filter(|&&node| distance_to(mesh, node, x0) <= r)
        .map(|&node| f.values[node] * vol)
        .sum())
}

/// Midpoint quadrature over the shell `r_in < |x - x0| <= r_out`.
///
/// Visits exactly the nodes counted by `ball(r_out)` but not by `ball(r_in)`,
/// so additivity holds up to summation rounding.
pub fn integrate_annulus(f: &ScalarField, x0: &[f64], r_in: f64, r_out: f64) -> Result<f64> {
    let mesh = f.mesh();
    if !(r_in > 0.0) || r_in >= r_out {
        return Err(Error::InvalidArg(format!(
            "annulus needs 0 < r_in < r_out, got r_in = {r_in}, r_out = {r_out}"
        )));
    }
    mesh.check_region(x0, r_out)?;
    let vol = mesh.cell_volume();
    Ok(mesh
        .ball_nodes()
        .iter()
        .filter(|&&node| {
            let d = distance_to(mesh, node, x0);
            d > r_in && d <= r_out
        })
        .map(|&node| f.values[node] * vol)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(matches!(DiscMesh::new(2, 5), Err(Error::RejectedGeometry(_))));
        assert!(matches!(DiscMesh::new(2, 16), Err(Error::InvalidArg(_))));
        assert!(matches!(DiscMesh::new(4, 17), Err(Error::InvalidArg(_))));
        assert!(matches!(DiscMesh::new(2, 7), Err(Error::InvalidArg(_))));
    }

    #[test]
    fn interior_count_matches_brute_force() {
        let mesh = DiscMesh::new(2, 17).unwrap();
        assert_eq!(mesh.h(), 0.125);
        let mut count = 0;
        for i in 0..17 {
            for j in 0..17 {
                let x = -1.0 + i as f64 * 0.125;
                let y = -1.0 + j as f64 * 0.125;
                if (x * x + y * y).sqrt() < 0.75 {
                    count += 1;
                }
            }
        }
        assert_eq!(mesh.interior_nodes().len(), count);
    }

    #[test]
    fn origin_is_a_node() {
        let mesh = DiscMesh::new(3, 9).unwrap();
        let center = 4 * 81 + 4 * 9 + 4;
        assert_eq!(mesh.position(center), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn classification_is_reflection_symmetric() {
        let mesh = DiscMesh::new(3, 33).unwrap();
        let n = mesh.size();
        for node in 0..mesh.node_count() {
            let idx: Vec<usize> = (0..3).map(|a| mesh.axis_index(node, a)).collect();
            for axis in 0..3 {
                let mut r = idx.clone();
                r[axis] = n - 1 - r[axis];
                let other = r[0] * n * n + r[1] * n + r[2];
                assert_eq!(mesh.class(node), mesh.class(other));
            }
        }
    }

    #[test]
    fn interior_stencils_avoid_exterior() {
        for &(dim, size) in &[(2, 9), (2, 17), (2, 33), (3, 17)] {
            let mesh = DiscMesh::new(dim, size).unwrap();
            let s = mesh.strides().to_vec();
            for &node in mesh.interior_nodes() {
                for a in 0..dim {
                    for &da in &[-1i64, 1] {
                        let na = (node as i64 + da * s[a] as i64) as usize;
                        assert_ne!(mesh.class(na), NodeClass::Exterior);
                        for b in (a + 1)..dim {
                            for &db in &[-1i64, 1] {
                                let nb = (na as i64 + db * s[b] as i64) as usize;
                                assert_ne!(mesh.class(nb), NodeClass::Exterior);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let mesh = DiscMesh::new(2, 33).unwrap();
        let f = ScalarField::zeros(&mesh);
        assert_eq!(integrate_ball(&f, &[0.0, 0.0], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn disc_area_and_moment() {
        let mesh = DiscMesh::new(2, 257).unwrap();
        let one = ScalarField::constant(&mesh, 1.0);
        let area = integrate_ball(&one, &[0.0, 0.0], 0.5).unwrap();
        assert!((area / (std::f64::consts::PI / 4.0) - 1.0).abs() < 0.02);
        let r2 = ScalarField::from_fn(&mesh, |x| x[0] * x[0] + x[1] * x[1]);
        let m = integrate_ball(&r2, &[0.0, 0.0], 0.5).unwrap();
        assert!((m / (std::f64::consts::PI / 32.0) - 1.0).abs() < 0.03);
        let shell = integrate_annulus(&one, &[0.0, 0.0], 0.25, 0.5).unwrap();
        assert!((shell / (std::f64::consts::PI * (0.25 - 0.0625)) - 1.0).abs() < 0.03);
        let shell = integrate_annulus(&r2, &[0.0, 0.0], 0.2, 0.4).unwrap();
        let exact = 2.0 * std::f64::consts::PI * (0.4f64.powi(4) - 0.2f64.powi(4)) / 4.0;
        assert!((shell / exact - 1.0).abs() < 0.03);
    }

    #[test]
    fn region_checks() {
        let mesh = DiscMesh::new(2, 33).unwrap();
        let one = ScalarField::constant(&mesh, 1.0);
        assert!(matches!(
            integrate_ball(&one, &[0.5, 0.0], 0.5),
            Err(Error::RegionOutOfRange(_))
        ));
        assert!(matches!(
            integrate_annulus(&one, &[0.0, 0.0], 0.5, 0.25),
            Err(Error::InvalidArg(_))
        ));
        assert!(integrate_ball(&one, &[0.0, 0.0, 0.0], 0.25).is_err());
    }
}
