use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{distance_to, norm, DiscMesh, ScalarField};

/// Exponential bump `η = C_η exp(1 / (|x - x0|² - 4R²))` on `B_{2R}(x0)`.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub eta: ScalarField,
    /// Unit-mass normalization `C_η`.
    pub scale: f64,
    /// `max |Dη|² / η` over nodes where `η > 0`.
    pub max_ratio: f64,
    /// Quadrature mass of `η` (one up to rounding).
    pub mass: f64,
}

/// `|Dη|²/η` for the unnormalized bump at distance `rho`, from the closed-form derivative.
pub(crate) fn bump_ratio(rho: f64, r: f64) -> f64 {
    let t = rho * rho - 4.0 * r * r;
    4.0 * rho * rho / t.powi(4) * (1.0 / t).exp()
}

pub fn cutoff_eta(x0: &[f64], r: f64, mesh: &Arc<DiscMesh>) -> Result<Cutoff> {
    if x0.len() != mesh.dim() {
        return Err(Error::InvalidArg(format!("center has {} coordinates", x0.len())));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArg(format!("radius must be positive, got {r}")));
    }
    if norm(x0) + 2.0 * r > 1.0 + 1e-12 {
        return Err(Error::RegionOutOfRange(format!(
            "B_2R(x0) with R = {r} leaves the unit ball"
        )));
    }
    let four_r2 = 4.0 * r * r;
    let mut raw = vec![0.0; mesh.node_count()];
    for (node, v) in raw.iter_mut().enumerate() {
        let d = distance_to(mesh, node, x0);
        let t = d * d - four_r2;
        if t < 0.0 {
            *v = (1.0 / t).exp();
        }
    }
    let raw_mass: f64 = raw.iter().sum::<f64>() * mesh.cell_volume();
    if !(raw_mass > 0.0) {
        return Err(Error::EmptyRegion(2.0 * r));
    }
    let scale = 1.0 / raw_mass;
    let mut max_ratio = 0.0f64;
    for (node, v) in raw.iter_mut().enumerate() {
        if *v > 0.0 {
            max_ratio = max_ratio.max(scale * bump_ratio(distance_to(mesh, node, x0), r));
        }
        *v *= scale;
    }
    let eta = ScalarField::from_values(mesh, raw)?;
    let mass = eta.values().iter().sum::<f64>() * mesh.cell_volume();
    Ok(Cutoff {
        eta,
        scale,
        max_ratio,
        mass,
    })
}
