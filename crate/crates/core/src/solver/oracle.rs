//! Direct solve of the quadratic (`p = 2`) problem.
//!
//! The system matrix is assembled entry by entry from the Hessian stencil
//! coefficients, independently of the matrix-free gradient used by the
//! descent solver, and factored with a band Cholesky in the natural
//! (row-major) ordering of the `Interior` unknowns.

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::mesh::ScalarField;
use crate::operators::hessian_stencils;

use super::banded::BandMatrix;

/// Largest band storage (entries) the oracle will allocate.
pub const MAX_BAND_ENTRIES: usize = 40_000_000;

/// Exact minimizer of the `p = 2`, `eps = 0` energy with `Band` (and
/// `Exterior`) values taken from `g`.
pub fn solve_linear_oracle(model: &EnergyModel, g: &ScalarField) -> Result<ScalarField> {
    if model.p() != 2.0 || model.eps() != 0.0 {
        return Err(Error::InvalidArg(format!(
            "the linear oracle needs p = 2 and eps = 0 (got p = {}, eps = {})",
            model.p(),
            model.eps()
        )));
    }
    if let Some(a) = model.weight() {
        g.check_mesh(a.mesh())?;
    }
    let mesh = g.mesh();
    let mut unknown = vec![usize::MAX; mesh.node_count()];
    for (k, &node) in mesh.interior_nodes().iter().enumerate() {
        unknown[node] = k;
    }
    let n = mesh.interior_nodes().len();
    let stencils = hessian_stencils(mesh);

    let mut bw = 0;
    for &node in mesh.stencil_nodes() {
        for st in &stencils {
            let ids = st
                .taps
                .iter()
                .map(|&(off, _)| unknown[(node as isize + off) as usize])
                .filter(|&k| k != usize::MAX);
            let (lo, hi) = ids.fold((usize::MAX, 0), |(lo, hi), k| (lo.min(k), hi.max(k)));
            if lo != usize::MAX {
                bw = bw.max(hi - lo);
            }
        }
    }
    let entries = n.saturating_mul(bw + 1);
    if entries > MAX_BAND_ENTRIES {
        return Err(Error::TooLarge(format!(
            "{n} unknowns with bandwidth {bw} need {entries} band entries (cap {MAX_BAND_ENTRIES})"
        )));
    }

    let gv = g.values();
    let mut a = BandMatrix::zeros(n, bw);
    let mut rhs = vec![0.0; n];
    let mut taps: Vec<(usize, f64)> = Vec::with_capacity(4);
    for &node in mesh.stencil_nodes() {
        let w = model.weight_pow(node);
        for st in &stencils {
            taps.clear();
            let mut known = 0.0;
            for &(off, coef) in &st.taps {
                let nb = (node as isize + off) as usize;
                match unknown[nb] {
                    usize::MAX => known += coef * gv[nb],
                    k => taps.push((k, coef)),
                }
            }
            let scale = w * st.multiplicity;
            for (i, &(ki, ci)) in taps.iter().enumerate() {
                rhs[ki] -= scale * ci * known;
                // Each unordered pair once; the band stores one triangle.
                for &(kj, cj) in &taps[..=i] {
                    a.add(ki, kj, scale * ci * cj);
                }
            }
        }
    }
    let x = a.cholesky()?.solve(&rhs);
    let mut out = g.clone();
    for (k, &node) in mesh.interior_nodes().iter().enumerate() {
        out.values_mut()[node] = x[k];
    }
    Ok(out)
}
