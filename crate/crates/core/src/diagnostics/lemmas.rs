//! Sampled checks of two scale-iteration lemmas for nondecreasing `φ`:
//!
//! * lemma A: `φ(r) <= C1 [(r/R)^α + μ] φ(R) + C2 R^β` for `r <= R` gives
//!   `φ(r) <= C4 r^σ` (`σ <= β < α`);
//! * lemma B: `φ(τR) <= γ φ(R) + σ(R)` gives
//!   `φ(R) <= C [(R/R0)^a φ(R0) + σ(R^μ R0^{1-μ})]`.
//!
//! Both act on finite samples; the conclusions are reported as the smallest
//! constants consistent with the samples.

use crate::error::{Error, Result};

/// Relative slack for floating-point comparisons of sampled inequalities.
pub const LEMMA_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaParams {
    pub c1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub c2: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Target decay exponent of the conclusion.
    pub sigma_exp: f64,
    /// Constant to test the conclusion against; the fitted minimum when absent.
    pub c4: Option<f64>,
}

impl Default for LemmaParams {
    fn default() -> Self {
        LemmaParams {
            c1: 1.0,
            alpha: 1.0,
            beta: 0.5,
            mu: 0.0,
            c2: 0.0,
            gamma: 0.5,
            tau: 0.5,
            sigma_exp: 0.5,
            c4: None,
        }
    }
}

impl LemmaParams {
    fn validate_a(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.c1 > 0.0 && self.alpha > 0.0 && self.beta > 0.0) {
            return bad("C1, alpha and beta must be positive".into());
        }
        if !(self.c2 >= 0.0 && self.mu >= 0.0) {
            return bad("C2 and mu must be nonnegative".into());
        }
        if self.beta >= self.alpha {
            return bad(format!("beta = {} must be below alpha = {}", self.beta, self.alpha));
        }
        if self.sigma_exp > self.beta {
            return bad(format!("sigma = {} must not exceed beta = {}", self.sigma_exp, self.beta));
        }
        Ok(())
    }

    fn validate_b(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParams(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaVerdict {
    pub hypothesis_ok: bool,
    pub conclusion_ok: bool,
    /// Smallest conclusion constant consistent with the samples.
    pub minimal_constant: f64,
    /// Lemma B only: `max (φ(τR) - σ(R)) / φ(R)` over matched pairs.
    pub empirical_gamma: Option<f64>,
    /// `(r, R)` pairs where the hypothesis fails.
    pub hypothesis_violations: Vec<(f64, f64)>,
    /// Radii where the conclusion fails for the tested constant.
    pub conclusion_violations: Vec<f64>,
    /// Lemma B only: matched pair count.
    pub matched_pairs: usize,
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + LEMMA_REL_TOL * rhs.abs().max(lhs.abs())
}

fn check_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if samples.iter().any(|&(r, v)| !(r > 0.0) || !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidArg("samples need positive radii and nonnegative values".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArg("sample radii must be strictly ascending".into()));
    }
    Ok(())
}

/// Checks lemma A on samples `(r_j, φ_j)`.
pub fn check_lemma_a(samples: &[(f64, f64)], params: &LemmaParams) -> Result<LemmaVerdict> {
    params.validate_a()?;
    check_samples(samples)?;
    let mut hypothesis_violations = Vec::new();
    for (i, &(r, phi_r)) in samples.iter().enumerate() {
        for &(big_r, phi_big) in &samples[i + 1..] {
            let rhs = params.c1 * ((r / big_r).powf(params.alpha) + params.mu) * phi_big
                + params.c2 * big_r.powf(params.beta);
            if !le(phi_r, rhs) {
                hypothesis_violations.push((r, big_r));
            }
        }
    }
    let minimal_constant = samples
        .iter()
        .map(|&(r, v)| v / r.powf(params.sigma_exp))
        .fold(0.0, f64::max);
    let c4 = params.c4.unwrap_or(minimal_constant);
    let conclusion_violations: Vec<f64> = samples
        .iter()
        .filter(|&&(r, v)| !le(v, c4 * r.powf(params.sigma_exp)))
        .map(|&(r, _)| r)
        .collect();
    Ok(LemmaVerdict {
        hypothesis_ok: hypothesis_violations.is_empty(),
        conclusion_ok: conclusion_violations.is_empty(),
        minimal_constant,
        empirical_gamma: None,
        hypothesis_violations,
        conclusion_violations,
        matched_pairs: 0,
    })
}

/// Linear interpolation of a nondecreasing sampled function, clamped to the
/// sampled range.
fn interpolate(samples: &[(f64, f64)], r: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if r <= first.0 {
        return first.1;
    }
    if r >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|s| s.0 <= r);
    let (r0, v0) = samples[k - 1];
    let (r1, v1) = samples[k];
    v0 + (v1 - v0) * (r - r0) / (r1 - r0)
}

/// Checks lemma B on `(r_j, φ_j)` and `(r_j, σ_j)` sampled at the same radii.
///
/// `τR` is matched to the nearest sampled radius within `match_tol`. The
/// conclusion is fitted with `R0` the largest radius, decay exponent
/// `decay_exp`, and `σ` interpolated at `R^μ R0^{1-μ}`.
pub fn check_lemma_b(
    phi: &[(f64, f64)],
    sigma: &[(f64, f64)],
    params: &LemmaParams,
    mu_interp: f64,
    decay_exp: f64,
    match_tol: f64,
) -> Result<LemmaVerdict> {
    params.validate_b()?;
    check_samples(phi)?;
    check_samples(sigma)?;
    if phi.len() != sigma.len() || phi.iter().zip(sigma).any(|(a, b)| a.0 != b.0) {
        return Err(Error::InvalidArg("phi and sigma must share their radii".into()));
    }
    if !(mu_interp > 0.0 && mu_interp < 1.0) {
        return Err(Error::InvalidParams(format!("mu must lie in (0, 1), got {mu_interp}")));
    }
    let mut hypothesis_violations = Vec::new();
    let mut matched = 0;
    let mut gamma_emp = f64::NEG_INFINITY;
    for (j, &(big_r, phi_big)) in phi.iter().enumerate() {
        let target = params.tau * big_r;
        let (i, gap) = phi
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s.0 - target).abs()))
            .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        if gap > match_tol || i == j {
            continue;
        }
        matched += 1;
        let (r_small, phi_small) = phi[i];
        if !le(phi_small, params.gamma * phi_big + sigma[j].1) {
            hypothesis_violations.push((r_small, big_r));
        }
        if phi_big > 0.0 {
            gamma_emp = gamma_emp.max((phi_small - sigma[j].1) / phi_big);
        }
    }
    if matched == 0 {
        return Err(Error::NoMatchingPairs(match_tol));
    }

    let (r0, phi0) = phi[phi.len() - 1];
    let mut minimal_constant = 0.0f64;
    let mut conclusion_violations = Vec::new();
    let bound = |r: f64| (r / r0).powf(decay_exp) * phi0 + interpolate(sigma, r.powf(mu_interp) * r0.powf(1.0 - mu_interp));
    for &(r, v) in phi {
        let b = bound(r);
        if b > 0.0 {
            minimal_constant = minimal_constant.max(v / b);
        } else if v > 0.0 {
            minimal_constant = f64::INFINITY;
        }
    }
    let c = params.c4.unwrap_or(minimal_constant);
    for &(r, v) in phi {
        if !le(v, c * bound(r)) {
            conclusion_violations.push(r);
        }
    }
    Ok(LemmaVerdict {
        hypothesis_ok: hypothesis_violations.is_empty(),
        conclusion_ok: conclusion_violations.is_empty() && minimal_constant.is_finite(),
        minimal_constant,
        empirical_gamma: gamma_emp.is_finite().then_some(gamma_emp),
        hypothesis_violations,
        conclusion_violations,
        matched_pairs: matched,
    })
}
