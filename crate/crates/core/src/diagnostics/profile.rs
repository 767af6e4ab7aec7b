use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::mesh::{integrate_annulus, integrate_ball, DiscMesh, ScalarField};
use crate::operators::{frob_norm, gradient, hessian};

/// `φ(r) = ∫_{B_r(x0)} |D²u|^p` and `σ(r) = ∫_{B_r(x0)} |Du|^p` on a radius ladder.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    pub center: Vec<f64>,
    pub p: f64,
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Phi,
    Sigma,
}

fn hessian_power(u: &ScalarField, p: f64) -> ScalarField {
    frob_norm(&hessian(u)).map(|v| v.powf(p))
}

fn gradient_power(u: &ScalarField, p: f64) -> ScalarField {
    gradient(u).magnitude().map(|v| v.powf(p))
}

/// Geometric ladder `r_max * ratio^j` for `j = 0, 1, ...` while `r >= r_min`,
/// returned in ascending order.
pub fn geometric_radii(r_max: f64, ratio: f64, r_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= r_min && out.len() < 1000 {
        out.push(r);
        r *= ratio;
    }
    out.reverse();
    out
}

/// Default ladder `0.4 · 0.75^j` down to `3h`.
pub fn default_radii(mesh: &DiscMesh) -> Vec<f64> {
    geometric_radii(0.4, 0.75, 3.0 * mesh.h())
}

/// Decay profile of `u` around `x0`. Both series use unregularized norms.
pub fn decay_profile(u: &ScalarField, model: &EnergyModel, x0: &[f64], radii: &[f64]) -> Result<DecayProfile> {
    let mesh = u.mesh();
    if radii.is_empty() {
        return Err(Error::InvalidArg("radius list is empty".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArg("radii must be strictly increasing".into()));
    }
    let floor = 3.0 * mesh.h();
    if let Some(&r) = radii.iter().find(|&&r| r < floor * (1.0 - 1e-12)) {
        return Err(Error::RadiiTooFine { radius: r, floor });
    }
    mesh.check_region(x0, *radii.last().unwrap())?;
    let p = model.p();
    let hp = hessian_power(u, p);
    let gp = gradient_power(u, p);
    let mut phi = Vec::with_capacity(radii.len());
    let mut sigma = Vec::with_capacity(radii.len());
    for &r in radii {
        phi.push(integrate_ball(&hp, x0, r)?);
        sigma.push(integrate_ball(&gp, x0, r)?);
    }
    Ok(DecayProfile {
        center: x0.to_vec(),
        p,
        radii: radii.to_vec(),
        phi,
        sigma,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFit {
    pub beta: f64,
    pub c: f64,
    /// Root-mean-square misfit in `log value`.
    pub residual: f64,
    pub used: usize,
    /// Samples dropped because their value was not positive.
    pub excluded: usize,
}

/// Least-squares fit of `log v = log C + β log r` over the positive samples.
pub fn fit_power_law(radii: &[f64], values: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(r, v)| **r > 0.0 && **v > 0.0)
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    let excluded = radii.len().min(values.len()) - pts.len();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} positive samples ({excluded} excluded), need at least 3",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("all radii coincide".into()));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - beta * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(PowerFit {
        beta,
        c: intercept.exp(),
        residual,
        used: pts.len(),
        excluded,
    })
}

/// `φ` samples at or below this multiple of `σ(r)/r^p` count as zero: the
/// Hessian is then roundoff relative to the gradient scale.
pub const PHI_NOISE_FLOOR: f64 = 1e-12;

/// Power-law fit of one profile series. `φ` samples under [`PHI_NOISE_FLOOR`]
/// are excluded like exact zeros.
pub fn fit_power_exponent(profile: &DecayProfile, series: Series) -> Result<PowerFit> {
    match series {
        Series::Phi => {
            let phi: Vec<f64> = profile
                .radii
                .iter()
                .zip(&profile.phi)
                .zip(&profile.sigma)
                .map(|((r, &v), s)| if v <= PHI_NOISE_FLOOR * s / r.powf(profile.p) { 0.0 } else { v })
                .collect();
            fit_power_law(&profile.radii, &phi)
        }
        Series::Sigma => fit_power_law(&profile.radii, &profile.sigma),
    }
}

/// Hölder exponent `β/p` read off the Hessian decay.
#[derive(Debug, Clone, PartialEq)]
pub struct MorreyEstimate {
    pub beta: f64,
    /// Unclamped `β/p`.
    pub raw: f64,
    /// `raw` clamped into `(0, 1]`.
    pub alpha: f64,
    pub clamped: bool,
}

pub fn morrey_exponent(profile: &DecayProfile, model: &EnergyModel) -> Result<MorreyEstimate> {
    let fit = fit_power_exponent(profile, Series::Phi)?;
    let raw = fit.beta / model.p();
    let alpha = raw.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(MorreyEstimate {
        beta: fit.beta,
        raw,
        alpha,
        clamped: alpha != raw,
    })
}

/// `∫_{B_R}|D²u|^p / ∫_{B_2R \ B_R}|Du|^p`, with `|Du|/R` in place of `|Du|`
/// when `normalized`.
pub fn caccioppoli_ratio(u: &ScalarField, model: &EnergyModel, x0: &[f64], r: f64, normalized: bool) -> Result<f64> {
    let mesh = u.mesh();
    mesh.check_region(x0, 2.0 * r)?;
    let p = model.p();
    let lhs = integrate_ball(&hessian_power(u, p), x0, r)?;
    let mut rhs = integrate_annulus(&gradient_power(u, p), x0, r, 2.0 * r)?;
    if normalized {
        rhs /= r.powf(p);
    }
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateDenominator(format!(
            "gradient vanishes on the annulus ({r}, {}] while the Hessian mass is {lhs:e}",
            2.0 * r
        )));
    }
    Ok(lhs / rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationCheck {
    /// `∫_{B_R}|Du|^p`.
    pub lhs: f64,
    /// Smallest `C` with `lhs <= C (∫_{B_R}|D²u|^p + R^p ‖u‖_∞^p)`.
    pub c_min: f64,
}

/// Lower-order interpolation bound on `B_R(0)`; `‖u‖_∞` is taken over the
/// closed unit ball.
pub fn interpolation_check(u: &ScalarField, model: &EnergyModel, r: f64) -> Result<InterpolationCheck> {
    let mesh = u.mesh();
    let origin = vec![0.0; mesh.dim()];
    mesh.check_region(&origin, r)?;
    let p = model.p();
    let lhs = integrate_ball(&gradient_power(u, p), &origin, r)?;
    let phi = integrate_ball(&hessian_power(u, p), &origin, r)?;
    let sup = mesh.ball_nodes().iter().map(|&k| u.get(k).abs()).fold(0.0, f64::max);
    let denom = phi + r.powf(p) * sup.powf(p);
    if denom == 0.0 {
        if lhs == 0.0 {
            return Ok(InterpolationCheck { lhs, c_min: 0.0 });
        }
        return Err(Error::DegenerateDenominator(
            "field vanishes but its gradient does not".into(),
        ));
    }
    Ok(InterpolationCheck { lhs, c_min: lhs / denom })
}
