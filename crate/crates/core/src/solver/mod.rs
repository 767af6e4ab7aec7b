//! Minimization of the discrete energy over `Interior` values with the
//! remaining nodes held at the boundary datum.
//!
//! Each stage of the eps-continuation runs a monotone descent: a
//! Polak–Ribière+ conjugate direction (reset to steepest descent whenever it
//! is not a descent direction), a curvature-based trial step from a 1-D Newton
//! solve along the direction, and Armijo backtracking on an energy difference
//! evaluated node by node. Every accepted step strictly lowers the energy.

mod banded;
mod oracle;

use std::collections::VecDeque;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use banded::{BandCholesky, BandMatrix};
pub use oracle::{solve_linear_oracle, MAX_BAND_ENTRIES};

use crate::energy::{EnergyModel, Kernel};
use crate::error::{Error, Result};
use crate::mesh::{NodeClass, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    BoundaryExtension,
    SeededRandom,
}

impl Init {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(Init::Zero),
            "boundary-extension" => Some(Init::BoundaryExtension),
            "seeded-random" => Some(Init::SeededRandom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Init::Zero => "zero",
            Init::BoundaryExtension => "boundary-extension",
            Init::SeededRandom => "seeded-random",
        }
    }
}

/// Armijo sufficient-decrease constant.
pub const ARMIJO_C: f64 = 1e-4;
/// Step reduction per failed Armijo test.
pub const BACKTRACK: f64 = 0.5;
/// Non-final continuation stages stop at this multiple of `tol_grad`.
const STAGE_TOL_FACTOR: f64 = 10.0;
/// Consecutive negligible decreases that end a stage.
const STAGNATION_PATIENCE: usize = 5;

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Stop when `max_k |∂E/∂u_k| <= tol_grad` (the gradient field times `hⁿ`).
    pub tol_grad: f64,
    /// A step whose relative energy decrease is below this counts as stagnant.
    pub tol_energy: f64,
    pub max_iter: usize,
    pub eps_schedule: Vec<f64>,
    pub init: Init,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol_grad: 1e-10,
            tol_energy: 1e-24,
            max_iter: 20_000,
            eps_schedule: default_eps_schedule(),
            init: Init::BoundaryExtension,
            seed: 0,
        }
    }
}

pub fn default_eps_schedule() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

impl SolveConfig {
    pub fn validate(&self, p: f64) -> Result<()> {
        if !(self.tol_grad > 0.0) || !(self.tol_energy > 0.0) {
            return Err(Error::InvalidArg("solver tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArg("max_iter must be at least 1".into()));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::InvalidArg("eps schedule is empty".into()));
        }
        if self.eps_schedule.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidArg("eps values must be finite and nonnegative".into()));
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArg("eps schedule must be strictly decreasing".into()));
        }
        if p != 2.0 && *self.eps_schedule.last().unwrap() == 0.0 {
            return Err(Error::InvalidArg(format!(
                "eps schedule may end at 0 only for p = 2 (p = {p})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub eps: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_iter_hit: bool,
    /// Energy at stage start followed by the energy after each accepted step.
    pub energies: Vec<f64>,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub stages: Vec<StageReport>,
    /// Unregularized (`eps = 0`) energy of the returned iterate.
    pub final_energy: f64,
    /// Regularized energy at `final_eps`, the quantity the last stage minimized.
    pub final_stage_energy: f64,
    pub final_grad_norm: f64,
    pub final_eps: f64,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }

    pub fn converged(&self) -> bool {
        self.stages.last().is_some_and(|s| s.converged)
    }

    pub fn max_iter_hit(&self) -> bool {
        self.stages.iter().any(|s| s.max_iter_hit)
    }

    /// Number of accepted steps that raised the energy (zero by construction).
    pub fn monotonicity_violations(&self) -> usize {
        self.stages
            .iter()
            .map(|s| s.energies.windows(2).filter(|w| w[1] > w[0]).count())
            .sum()
    }
}

/// Starting iterate: `g` off the `Interior`, `init`-dependent values inside.
pub fn initial_guess(g: &ScalarField, init: Init, seed: u64) -> ScalarField {
    let mesh = g.mesh();
    let mut u = g.clone();
    match init {
        Init::Zero => {
            for &node in mesh.interior_nodes() {
                u.values_mut()[node] = 0.0;
            }
        }
        Init::BoundaryExtension => extend_inward(&mut u),
        Init::SeededRandom => {
            extend_inward(&mut u);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &node in mesh.interior_nodes() {
                u.values_mut()[node] += rng.gen_range(-1.0..1.0);
            }
        }
    }
    u
}

/// Copies `Band` values inward, each `Interior` node taking the value of the
/// neighbour through which a breadth-first sweep from the band reached it.
fn extend_inward(u: &mut ScalarField) {
    let mesh = u.mesh().clone();
    let mut seen: Vec<bool> = mesh.classes().iter().map(|c| *c != NodeClass::Interior).collect();
    let mut queue: VecDeque<usize> = (0..mesh.node_count())
        .filter(|&k| mesh.class(k) == NodeClass::Band)
        .collect();
    let s = mesh.strides().to_vec();
    while let Some(node) = queue.pop_front() {
        let v = u.values()[node];
        for &st in &s {
            for nb in [node.wrapping_sub(st), node + st] {
                if nb < seen.len() && !seen[nb] {
                    seen[nb] = true;
                    u.values_mut()[nb] = v;
                    queue.push_back(nb);
                }
            }
        }
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Approximate minimizer of a convex line function by safeguarded Newton.
fn line_minimizer(line: &crate::energy::LineModel, slope0: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut alpha = 0.0;
    for _ in 0..50 {
        let (d1, d2) = line.derivatives(alpha);
        if d1.abs() <= 1e-10 * slope0.abs() {
            break;
        }
        if d1 < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let mut next = if d2 > 0.0 { alpha - d1 / d2 } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(1e-300) };
        }
        if next == alpha {
            break;
        }
        alpha = next;
    }
    alpha
}

/// Smallest backtracked step, relative to the trial step.
const MIN_STEP_RATIO: f64 = 1e-14;

/// Trial step from the line minimizer, then Armijo backtracking.
fn armijo_step(kernel: &Kernel<'_>, u: &[f64], dir: &[f64], slope: f64) -> Option<(f64, f64)> {
    let line = kernel.line(u, dir);
    let alpha0 = line_minimizer(&line, slope);
    let mut alpha = if alpha0 > 0.0 && alpha0.is_finite() {
        alpha0
    } else {
        1.0 / sup_norm(dir)
    };
    let min_step = alpha * MIN_STEP_RATIO;
    while alpha >= min_step {
        let de = line.delta(alpha);
        if de.is_finite() && de < 0.0 && de <= ARMIJO_C * alpha * slope {
            return Some((alpha, de));
        }
        alpha *= BACKTRACK;
    }
    None
}

/// Minimizes `model` with `Interior` values free and all others fixed to `g`.
pub fn minimize(model: &EnergyModel, g: &ScalarField, cfg: &SolveConfig) -> Result<(ScalarField, SolveReport)> {
    let start = Instant::now();
    let u0 = initial_guess(g, cfg.init, cfg.seed);
    let (u, mut report) = minimize_from(model, u0, cfg)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((u, report))
}

/// Like [`minimize`], starting from `u0` (whose non-`Interior` values are the datum).
pub fn minimize_from(model: &EnergyModel, u0: ScalarField, cfg: &SolveConfig) -> Result<(ScalarField, SolveReport)> {
    let start = Instant::now();
    cfg.validate(model.p())?;
    if let Some(i) = u0.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("boundary datum at node {i}")));
    }
    if let Some(a) = model.weight() {
        u0.check_mesh(a.mesh())?;
    }
    let mesh = u0.mesh().clone();
    let mut u = u0.into_values();
    let n = u.len();
    let schedule: Vec<f64> = if model.p() == 2.0 {
        vec![0.0]
    } else {
        cfg.eps_schedule.clone()
    };

    let mut stages = Vec::with_capacity(schedule.len());
    let mut grad = vec![0.0; n];
    let mut grad_prev = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut total_iter = 0usize;
    for (stage_idx, &eps) in schedule.iter().enumerate() {
        let stage_model = model.with_eps(eps)?;
        let kernel = Kernel::new(&stage_model, &mesh);
        let last = stage_idx + 1 == schedule.len();
        let tol = if last { cfg.tol_grad } else { cfg.tol_grad * STAGE_TOL_FACTOR };

        let mut e = kernel.energy_and_partials(&u, &mut grad);
        if !e.is_finite() {
            return Err(Error::NonFiniteEnergy);
        }
        let mut energies = vec![e];
        let mut stage = StageReport {
            eps,
            iterations: 0,
            converged: false,
            max_iter_hit: false,
            energies: Vec::new(),
            grad_norm: sup_norm(&grad),
        };
        let mut have_dir = false;
        let mut stagnant = 0;
        loop {
            stage.grad_norm = sup_norm(&grad);
            if stage.grad_norm <= tol {
                stage.converged = true;
                break;
            }
            if stage.iterations >= cfg.max_iter {
                stage.max_iter_hit = true;
                break;
            }
            if stagnant >= STAGNATION_PATIENCE {
                break;
            }
            // Conjugate direction, falling back to steepest descent.
            let gg_prev = dot(&grad_prev, &grad_prev);
            let beta = if have_dir && gg_prev > 0.0 {
                let num: f64 = grad.iter().zip(&grad_prev).map(|(g, gp)| g * (g - gp)).sum();
                (num / gg_prev).max(0.0)
            } else {
                0.0
            };
            for k in 0..n {
                dir[k] = -grad[k] + beta * dir[k];
            }
            let mut slope = dot(&grad, &dir);
            let mut steepest = beta == 0.0;
            if !(slope < 0.0) {
                dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
                slope = -dot(&grad, &grad);
                steepest = true;
            }

            let mut accepted = armijo_step(&kernel, &u, &dir, slope);
            if accepted.is_none() && !steepest {
                dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
                slope = -dot(&grad, &grad);
                accepted = armijo_step(&kernel, &u, &dir, slope);
            }
            let Some((alpha, de)) = accepted else {
                return Err(Error::LineSearchStall {
                    iteration: total_iter + stage.iterations,
                    min_step: MIN_STEP_RATIO,
                });
            };
            for k in 0..n {
                u[k] += alpha * dir[k];
            }
            std::mem::swap(&mut grad, &mut grad_prev);
            let e_direct = kernel.energy_and_partials(&u, &mut grad);
            if !e_direct.is_finite() {
                return Err(Error::NonFiniteEnergy);
            }
            e += de;
            energies.push(e);
            have_dir = true;
            stage.iterations += 1;
            if -de <= cfg.tol_energy * e.abs().max(f64::MIN_POSITIVE) {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
        }
        total_iter += stage.iterations;
        stage.energies = energies;
        stages.push(stage);
    }

    let final_eps = *schedule.last().unwrap();
    let final_stage_energy = Kernel::new(&model.with_eps(final_eps)?, &mesh).energy(&u);
    let final_energy = Kernel::new(&model.with_eps(0.0)?, &mesh).energy(&u);
    let final_grad_norm = stages.last().map(|s| s.grad_norm).unwrap_or(0.0);
    let field = ScalarField::from_values(&mesh, u)?;
    Ok((
        field,
        SolveReport {
            stages,
            final_energy,
            final_stage_energy,
            final_grad_norm,
            final_eps,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Largest pairwise sup-norm difference between minimizers started from
/// seeded-random iterates with seeds `cfg.seed, cfg.seed + 1, ...`.
pub fn uniqueness_check(model: &EnergyModel, g: &ScalarField, cfg: &SolveConfig, starts: usize) -> Result<f64> {
    if starts < 2 {
        return Err(Error::InvalidArg(format!("uniqueness check needs at least 2 starts, got {starts}")));
    }
    let seeds: Vec<u64> = (0..starts as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    uniqueness_check_with_seeds(model, g, cfg, &seeds)
}

/// [`uniqueness_check`] with explicit seeds.
pub fn uniqueness_check_with_seeds(model: &EnergyModel, g: &ScalarField, cfg: &SolveConfig, seeds: &[u64]) -> Result<f64> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArg("uniqueness check needs at least 2 seeds".into()));
    }
    let mut solutions = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let run = SolveConfig {
            init: Init::SeededRandom,
            seed,
            ..cfg.clone()
        };
        solutions.push(minimize(model, g, &run)?.0);
    }
    let mut worst = 0.0f64;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            worst = worst.max(solutions[i].sup_diff(&solutions[j]));
        }
    }
    Ok(worst)
}
