//! Centered finite-difference gradient and Hessian, and the Frobenius norm.

use std::sync::Arc;

use crate::error::Result;
use crate::mesh::{DiscMesh, ScalarField};

/// `n` components per node; meaningful on `Interior` nodes, zero elsewhere.
#[derive(Debug, Clone)]
pub struct VectorField {
    mesh: Arc<DiscMesh>,
    values: Vec<f64>,
}

impl VectorField {
    pub fn mesh(&self) -> &Arc<DiscMesh> {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.mesh.dim()
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let d = self.mesh.dim();
        &self.values[node * d..(node + 1) * d]
    }

    /// Euclidean length of the vector at each node.
    pub fn magnitude(&self) -> ScalarField {
        let d = self.mesh.dim();
        let values = self
            .values
            .chunks_exact(d)
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect();
        ScalarField::from_values(&self.mesh, values).expect("magnitudes are finite")
    }

    /// Component `axis` as a scalar field.
    pub fn component(&self, axis: usize) -> ScalarField {
        let d = self.mesh.dim();
        let values = self.values.iter().skip(axis).step_by(d).copied().collect();
        ScalarField::from_values(&self.mesh, values).expect("components are finite")
    }
}

/// Upper-triangle index pairs `(a, b)` with `a <= b`, in storage order.
pub fn hessian_components(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim * (dim + 1) / 2);
    for a in 0..dim {
        for b in a..dim {
            out.push((a, b));
        }
    }
    out
}

/// Symmetric Hessians stored as their upper triangle. Entries are filled on
/// the mesh's stencil nodes (every ball node whose stencil stays on the grid)
/// and zero elsewhere.
#[derive(Debug, Clone)]
pub struct HessianField {
    mesh: Arc<DiscMesh>,
    values: Vec<f64>,
}

impl HessianField {
    pub fn mesh(&self) -> &Arc<DiscMesh> {
        &self.mesh
    }

    pub fn component_count(&self) -> usize {
        let d = self.mesh.dim();
        d * (d + 1) / 2
    }

    /// Upper-triangle entries at `node`, ordered as [`hessian_components`].
    pub fn at(&self, node: usize) -> &[f64] {
        let c = self.component_count();
        &self.values[node * c..(node + 1) * c]
    }

    /// Full entry `(a, b)` at `node`.
    pub fn entry(&self, node: usize, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let d = self.mesh.dim();
        // Row-wise upper triangle offset.
        let offset = a * d - a * (a + 1) / 2 + b;
        self.at(node)[offset]
    }
}

/// Frobenius norm squared of an upper-triangle-stored symmetric matrix,
/// counting each off-diagonal entry twice.
pub(crate) fn frob_sq(dim: usize, upper: &[f64]) -> f64 {
    let mut k = 0;
    let mut s = 0.0;
    for a in 0..dim {
        for b in a..dim {
            let v = upper[k];
            s += if a == b { v * v } else { 2.0 * v * v };
            k += 1;
        }
    }
    s
}

/// Contraction `A : B` of two upper-triangle-stored symmetric matrices.
pub(crate) fn contract(dim: usize, a_up: &[f64], b_up: &[f64]) -> f64 {
    let mut k = 0;
    let mut s = 0.0;
    for a in 0..dim {
        for b in a..dim {
            let m = if a == b { 1.0 } else { 2.0 };
            s += m * a_up[k] * b_up[k];
            k += 1;
        }
    }
    s
}

/// Stencil of one Hessian component: signed node offsets and weights.
#[derive(Debug, Clone)]
pub(crate) struct ComponentStencil {
    pub taps: Vec<(isize, f64)>,
    /// 1 for diagonal entries, 2 for off-diagonal ones (Frobenius weight).
    pub multiplicity: f64,
}

pub(crate) fn hessian_stencils(mesh: &DiscMesh) -> Vec<ComponentStencil> {
    let h2 = mesh.h() * mesh.h();
    let s = mesh.strides();
    hessian_components(mesh.dim())
        .into_iter()
        .map(|(a, b)| {
            let sa = s[a] as isize;
            let sb = s[b] as isize;
            if a == b {
                ComponentStencil {
                    taps: vec![(sa, 1.0 / h2), (0, -2.0 / h2), (-sa, 1.0 / h2)],
                    multiplicity: 1.0,
                }
            } else {
                let w = 1.0 / (4.0 * h2);
                ComponentStencil {
                    taps: vec![(sa + sb, w), (sa - sb, -w), (-sa + sb, -w), (-sa - sb, w)],
                    multiplicity: 2.0,
                }
            }
        })
        .collect()
}

/// Writes the Hessian of `u` at `node` into `out` (upper triangle).
#[inline]
pub(crate) fn hessian_at(dim: usize, strides: &[usize], inv_h2: f64, u: &[f64], node: usize, out: &mut [f64]) {
    let mut k = 0;
    for a in 0..dim {
        let sa = strides[a];
        out[k] = (u[node + sa] - 2.0 * u[node] + u[node - sa]) * inv_h2;
        k += 1;
        for &sb in &strides[a + 1..dim] {
            out[k] = (u[node + sa + sb] - u[node + sa - sb] - u[node - sa + sb] + u[node - sa - sb])
                * (0.25 * inv_h2);
            k += 1;
        }
    }
}

/// Centered-difference gradient at every `Interior` node.
pub fn gradient(u: &ScalarField) -> VectorField {
    let mesh = u.mesh();
    let d = mesh.dim();
    let inv_2h = 1.0 / (2.0 * mesh.h());
    let s = mesh.strides();
    let v = u.values();
    let mut values = vec![0.0; mesh.node_count() * d];
    for &node in mesh.interior_nodes() {
        for a in 0..d {
            values[node * d + a] = (v[node + s[a]] - v[node - s[a]]) * inv_2h;
        }
    }
    VectorField {
        mesh: Arc::clone(mesh),
        values,
    }
}

/// Centered-difference Hessian. Diagonal entries use the three-point second
/// difference, mixed entries the four-point diagonal stencil; both are exact on
/// quadratics.
pub fn hessian(u: &ScalarField) -> HessianField {
    let mesh = u.mesh();
    let d = mesh.dim();
    let c = d * (d + 1) / 2;
    let inv_h2 = 1.0 / (mesh.h() * mesh.h());
    let mut values = vec![0.0; mesh.node_count() * c];
    for &node in mesh.stencil_nodes() {
        hessian_at(d, mesh.strides(), inv_h2, u.values(), node, &mut values[node * c..(node + 1) * c]);
    }
    HessianField {
        mesh: Arc::clone(mesh),
        values,
    }
}

/// Pointwise Frobenius norm `sqrt(Σ_ab H_ab²)`.
pub fn frob_norm(hess: &HessianField) -> ScalarField {
    let d = hess.mesh.dim();
    let c = hess.component_count();
    let values = hess.values.chunks_exact(c).map(|m| frob_sq(d, m).sqrt()).collect();
    ScalarField::from_values(&hess.mesh, values).expect("norms of finite entries are finite")
}

/// Builds a Hessian field directly from per-node upper-triangle entries.
pub fn hessian_from_values(mesh: &Arc<DiscMesh>, values: Vec<f64>) -> Result<HessianField> {
    let d = mesh.dim();
    let c = d * (d + 1) / 2;
    if values.len() != mesh.node_count() * c {
        return Err(crate::error::Error::InvalidArg(format!(
            "expected {} Hessian entries, got {}",
            mesh.node_count() * c,
            values.len()
        )));
    }
    Ok(HessianField {
        mesh: Arc::clone(mesh),
        values,
    })
}
