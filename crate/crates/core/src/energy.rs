//! Discrete Hessian energy `E(u) = Σ a(x)^p (|D²u(x)|² + ε²)^{p/2} hⁿ`, its
//! first variation, and the weak Euler–Lagrange residual.
//!
//! The sum runs over every ball node whose Hessian stencil lies on the grid.
//! Hessians near the sphere therefore read one ring of values outside the
//! ball; for boundary data given by a formula these hold the formula's
//! extension and never change during minimization. The unknowns are the
//! `Interior` values only.

use crate::error::{Error, Result};
use crate::mesh::{DiscMesh, NodeClass, ScalarField};
use crate::operators::{contract, frob_sq, hessian_at};

#[derive(Debug, Clone)]
pub struct EnergyModel {
    p: f64,
    eps: f64,
    weight: Option<ScalarField>,
    delta: f64,
}

impl EnergyModel {
    /// Unweighted model (`a ≡ 1`, `δ = 1`).
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        if !p.is_finite() || p < 2.0 {
            return Err(Error::InvalidArg(format!("exponent p must be >= 2, got {p}")));
        }
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidArg(format!("regularization eps must be >= 0, got {eps}")));
        }
        Ok(EnergyModel {
            p,
            eps,
            weight: None,
            delta: 1.0,
        })
    }

    /// Attaches a weight field `a` with `a >= delta > 0` on the closed ball.
    pub fn with_weight(mut self, weight: ScalarField, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArg(format!("weight lower bound must be positive, got {delta}")));
        }
        let mesh = weight.mesh();
        if let Some(&node) = mesh
            .ball_nodes()
            .iter()
            .find(|&&node| weight.get(node) < delta * (1.0 - 1e-12))
        {
            return Err(Error::InvalidArg(format!(
                "weight {} at node {node} is below the lower bound {delta}",
                weight.get(node)
            )));
        }
        self.weight = Some(weight);
        self.delta = delta;
        Ok(self)
    }

    /// Same model with a different regularization.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut m = EnergyModel::new(self.p, eps)?;
        m.weight = self.weight.clone();
        m.delta = self.delta;
        Ok(m)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weight(&self) -> Option<&ScalarField> {
        self.weight.as_ref()
    }

    /// Whether derivative-based operations are well defined.
    pub fn is_smooth(&self) -> bool {
        self.p == 2.0 || self.eps > 0.0
    }

    pub(crate) fn weight_pow(&self, node: usize) -> f64 {
        match &self.weight {
            Some(a) => a.get(node).powf(self.p),
            None => 1.0,
        }
    }

    fn check_field(&self, u: &ScalarField) -> Result<()> {
        if let Some(a) = &self.weight {
            u.check_mesh(a.mesh())?;
        }
        Ok(())
    }

    fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::DegenerateModel(format!(
                "p = {} with eps = 0 is not differentiable at vanishing Hessians",
                self.p
            )))
        }
    }
}

/// Precomputed loop data shared by the energy kernels.
pub(crate) struct Kernel<'a> {
    pub mesh: &'a DiscMesh,
    pub model: &'a EnergyModel,
    pub dim: usize,
    pub ncomp: usize,
    pub inv_h2: f64,
    pub vol: f64,
    pub half_p: f64,
    pub eps2: f64,
}

impl<'a> Kernel<'a> {
    pub fn new(model: &'a EnergyModel, mesh: &'a DiscMesh) -> Self {
        let dim = mesh.dim();
        Kernel {
            mesh,
            model,
            dim,
            ncomp: dim * (dim + 1) / 2,
            inv_h2: 1.0 / (mesh.h() * mesh.h()),
            vol: mesh.cell_volume(),
            half_p: 0.5 * model.p,
            eps2: model.eps * model.eps,
        }
    }

    #[inline]
    fn integrand(&self, s: f64) -> f64 {
        if self.half_p == 1.0 {
            s
        } else {
            s.powf(self.half_p)
        }
    }

    /// `p s^{(p-2)/2}`: derivative of `s^{p/2}` with respect to `|H|²`, times 2.
    #[inline]
    fn flux_factor(&self, s: f64) -> f64 {
        if self.half_p == 1.0 {
            2.0
        } else {
            self.model.p * s.powf(self.half_p - 1.0)
        }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let mut hess = [0.0; 6];
        let strides = self.mesh.strides();
        let mut total = 0.0;
        for &node in self.mesh.stencil_nodes() {
            hessian_at(self.dim, strides, self.inv_h2, u, node, &mut hess);
            let s = frob_sq(self.dim, &hess[..self.ncomp]) + self.eps2;
            total += self.model.weight_pow(node) * self.integrand(s);
        }
        total * self.vol
    }

    /// Partial derivatives `∂E/∂u_k` on `Interior` nodes (zero elsewhere).
    /// Returns the energy alongside.
    pub fn energy_and_partials(&self, u: &[f64], out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut hess = [0.0; 6];
        let strides = self.mesh.strides();
        let mut total = 0.0;
        for &node in self.mesh.stencil_nodes() {
            hessian_at(self.dim, strides, self.inv_h2, u, node, &mut hess);
            let s = frob_sq(self.dim, &hess[..self.ncomp]) + self.eps2;
            let w = self.model.weight_pow(node);
            total += w * self.integrand(s);
            let flux = w * self.flux_factor(s) * self.vol;
            self.scatter(node, flux, &hess, out);
        }
        for (k, class) in self.mesh.classes().iter().enumerate() {
            if *class != NodeClass::Interior {
                out[k] = 0.0;
            }
        }
        total * self.vol
    }

    /// Adds `flux * (H : ∂H/∂u_k)` to every node `k` of the stencil at `node`.
    #[inline]
    fn scatter(&self, node: usize, flux: f64, hess: &[f64], out: &mut [f64]) {
        let strides = self.mesh.strides();
        let mut k = 0;
        for a in 0..self.dim {
            let sa = strides[a];
            let c = flux * hess[k] * self.inv_h2;
            out[node + sa] += c;
            out[node] -= 2.0 * c;
            out[node - sa] += c;
            k += 1;
            for &sb in &strides[a + 1..self.dim] {
                // Off-diagonal entries count twice in the Frobenius product.
                let c = 2.0 * flux * hess[k] * 0.25 * self.inv_h2;
                out[node + sa + sb] += c;
                out[node + sa - sb] -= c;
                out[node - sa + sb] -= c;
                out[node - sa - sb] += c;
                k += 1;
            }
        }
    }

    /// Restriction of the energy to the line `u + α d`.
    pub fn line(&self, u: &[f64], d: &[f64]) -> LineModel {
        let mut hu = [0.0; 6];
        let mut hd = [0.0; 6];
        let strides = self.mesh.strides();
        let mut terms = Vec::new();
        for &node in self.mesh.stencil_nodes() {
            hessian_at(self.dim, strides, self.inv_h2, d, node, &mut hd);
            let dd = frob_sq(self.dim, &hd[..self.ncomp]);
            if dd == 0.0 {
                continue;
            }
            hessian_at(self.dim, strides, self.inv_h2, u, node, &mut hu);
            terms.push(LineTerm {
                weight: self.model.weight_pow(node),
                s0: frob_sq(self.dim, &hu[..self.ncomp]) + self.eps2,
                ud: contract(self.dim, &hu[..self.ncomp], &hd[..self.ncomp]),
                dd,
            });
        }
        LineModel {
            terms,
            half_p: self.half_p,
            vol: self.vol,
        }
    }
}

struct LineTerm {
    weight: f64,
    s0: f64,
    ud: f64,
    dd: f64,
}

/// `φ(α) = E(u + α d)` reduced to per-node scalars, so that energy
/// differences are evaluated without cancellation against the total.
pub(crate) struct LineModel {
    terms: Vec<LineTerm>,
    half_p: f64,
    vol: f64,
}

impl LineModel {
    /// `φ(α) - φ(0)`, accumulated node by node.
    pub fn delta(&self, alpha: f64) -> f64 {
        let q = self.half_p;
        let mut total = 0.0;
        for t in &self.terms {
            let ds = alpha * (2.0 * t.ud + alpha * t.dd);
            let diff = if q == 1.0 {
                ds
            } else if t.s0 > 0.0 {
                t.s0.powf(q) * (q * (ds / t.s0).ln_1p()).exp_m1()
            } else {
                ds.max(0.0).powf(q)
            };
            total += t.weight * diff;
        }
        total * self.vol
    }

    /// `φ'(α)` and `φ''(α)`.
    pub fn derivatives(&self, alpha: f64) -> (f64, f64) {
        let q = self.half_p;
        let (mut d1, mut d2) = (0.0, 0.0);
        for t in &self.terms {
            let s = (t.s0 + alpha * (2.0 * t.ud + alpha * t.dd)).max(0.0);
            let ds = 2.0 * (t.ud + alpha * t.dd);
            if q == 1.0 {
                d1 += t.weight * ds;
                d2 += t.weight * 2.0 * t.dd;
            } else if s > 0.0 {
                let sq = s.powf(q - 1.0);
                d1 += t.weight * q * sq * ds;
                d2 += t.weight * q * (sq * 2.0 * t.dd + (q - 1.0) * sq / s * ds * ds);
            }
        }
        (d1 * self.vol, d2 * self.vol)
    }
}

/// Discrete energy of `u`.
pub fn energy(model: &EnergyModel, u: &ScalarField) -> Result<f64> {
    model.check_field(u)?;
    let e = Kernel::new(model, u.mesh()).energy(u.values());
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFiniteEnergy)
    }
}

/// First variation as a field `G` with `Σ_k G_k v_k hⁿ = dE(u; v)` for every
/// direction `v` supported on `Interior` nodes. `G` vanishes off `Interior`.
pub fn energy_gradient(model: &EnergyModel, u: &ScalarField) -> Result<ScalarField> {
    model.require_smooth()?;
    model.check_field(u)?;
    let mesh = u.mesh();
    let mut partials = vec![0.0; mesh.node_count()];
    let e = Kernel::new(model, mesh).energy_and_partials(u.values(), &mut partials);
    if !e.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let inv_vol = 1.0 / mesh.cell_volume();
    partials.iter_mut().for_each(|v| *v *= inv_vol);
    ScalarField::from_values(mesh, partials)
}

/// Weak Euler–Lagrange residual `Σ a^p p (|H_u|²+ε²)^{(p-2)/2} (H_u : H_φ) hⁿ`
/// for a test function `φ` vanishing off the `Interior` nodes.
pub fn el_residual(model: &EnergyModel, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
    model.check_field(u)?;
    phi.check_mesh(u.mesh())?;
    let mesh = u.mesh();
    let outside = mesh
        .classes()
        .iter()
        .zip(phi.values())
        .filter(|(c, v)| **c != NodeClass::Interior && **v != 0.0)
        .count();
    if outside > 0 {
        return Err(Error::UnsupportedTestFunction { count: outside });
    }
    let kernel = Kernel::new(model, mesh);
    let (mut hu, mut hp) = ([0.0; 6], [0.0; 6]);
    let mut total = 0.0;
    for &node in mesh.stencil_nodes() {
        hessian_at(kernel.dim, mesh.strides(), kernel.inv_h2, phi.values(), node, &mut hp);
        if hp[..kernel.ncomp].iter().all(|v| *v == 0.0) {
            continue;
        }
        hessian_at(kernel.dim, mesh.strides(), kernel.inv_h2, u.values(), node, &mut hu);
        let s = frob_sq(kernel.dim, &hu[..kernel.ncomp]) + kernel.eps2;
        let factor = if model.p == 2.0 {
            2.0
        } else if s > 0.0 {
            model.p * s.powf(0.5 * model.p - 1.0)
        } else {
            0.0
        };
        total += model.weight_pow(node) * factor * contract(kernel.dim, &hu[..kernel.ncomp], &hp[..kernel.ncomp]);
    }
    let r = total * kernel.vol;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFiniteEnergy)
    }
}

/// Discrete pairing `Σ_k f_k g_k hⁿ`.
pub fn pairing(f: &ScalarField, g: &ScalarField) -> f64 {
    f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() * f.mesh().cell_volume()
}
