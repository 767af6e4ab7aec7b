//! Quick built-in property checks, run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{check_lemma_a, cutoff_eta, decay_profile, LemmaParams};
use crate::energy::{energy, energy_gradient, pairing, EnergyModel};
use crate::error::Result;
use crate::io::{format_field, parse_field, Polynomial};
use crate::mesh::{DiscMesh, NodeClass, ScalarField};
use crate::solver::{minimize, solve_linear_oracle, SolveConfig};

#[derive(Debug, Clone)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfCheck {
    match f() {
        Ok((passed, detail)) => SelfCheck { name, passed, detail },
        Err(e) => SelfCheck {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_interior(u: &ScalarField, rng: &mut ChaCha8Rng, scale: f64) -> ScalarField {
    let mesh = u.mesh().clone();
    let mut v = u.clone();
    for &k in mesh.interior_nodes() {
        v.values_mut()[k] += scale * rng.gen_range(-1.0..1.0);
    }
    v
}

pub fn run(seed: u64) -> Vec<SelfCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(check("quadratic is stationary", || {
        let mesh = DiscMesh::new(2, 33)?;
        let g = Polynomial::preset("saddle", 2).unwrap().field(&mesh);
        let grad = energy_gradient(&EnergyModel::new(2.0, 0.0)?, &g)?;
        let sup = grad.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) * mesh.cell_volume();
        Ok((sup <= 1e-10, format!("sup |dE/du| = {sup:e}")))
    }));

    let fd_seed = rng.gen::<u64>();
    out.push(check("gradient matches finite differences", || {
        let mut rng = ChaCha8Rng::seed_from_u64(fd_seed);
        let mesh = DiscMesh::new(2, 17)?;
        let m = EnergyModel::new(3.0, 1e-2)?;
        let u = random_interior(&ScalarField::from_fn(&mesh, |x| x[0] * x[1]), &mut rng, 0.1);
        let zero = ScalarField::zeros(&mesh);
        let v = random_interior(&zero, &mut rng, 1.0);
        let t = 1e-5;
        let shifted = |s: f64| {
            let vals = u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect();
            ScalarField::from_values(&mesh, vals)
        };
        let fd = (energy(&m, &shifted(t)?)? - energy(&m, &shifted(-t)?)?) / (2.0 * t);
        let an = pairing(&energy_gradient(&m, &u)?, &v);
        let rel = (fd - an).abs() / an.abs().max(1e-300);
        Ok((rel <= 1e-5, format!("relative error {rel:e}")))
    }));

    out.push(check("descent agrees with the linear oracle", || {
        let mesh = DiscMesh::new(2, 17)?;
        let g = ScalarField::from_fn(&mesh, |x| x[0].powi(3) + 0.3 * x[0] * x[1].powi(3) - x[1].powi(4));
        let m = EnergyModel::new(2.0, 0.0)?;
        let exact = solve_linear_oracle(&m, &g)?;
        let cfg = SolveConfig {
            tol_grad: 1e-13,
            max_iter: 100_000,
            ..Default::default()
        };
        let (u, rep) = minimize(&m, &g, &cfg)?;
        let d = u.sup_diff(&exact);
        Ok((
            d <= 1e-8 && rep.monotonicity_violations() == 0,
            format!("sup difference {d:e}, {} iterations", rep.iterations()),
        ))
    }));

    let rt_seed = rng.gen::<u64>();
    out.push(check("field file round trip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(rt_seed);
        let mesh = DiscMesh::new(2, 17)?;
        let u = ScalarField::from_fn(&mesh, |_| rng.gen_range(-1e3..1e3) * 10f64.powi(rng.gen_range(-30..30)));
        let back = parse_field(&format_field(&u)).map_err(crate::error::Error::Parse)?;
        let exact = u.values().iter().zip(back.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        Ok((exact, format!("{} values", u.values().len())))
    }));

    out.push(check("profile is nondecreasing", || {
        let mesh = DiscMesh::new(2, 65)?;
        let u = ScalarField::from_fn(&mesh, |x| (3.0 * x[0]).sin() * x[1]);
        let prof = decay_profile(&u, &EnergyModel::new(2.0, 0.0)?, &[0.0, 0.0], &[0.1, 0.2, 0.3, 0.4])?;
        let ok = prof.phi.windows(2).all(|w| w[0] <= w[1]) && prof.sigma.windows(2).all(|w| w[0] <= w[1]);
        Ok((ok, format!("phi = {:?}", prof.phi)))
    }));

    out.push(check("power law passes lemma A", || {
        let samples: Vec<(f64, f64)> = (0..8).map(|j| 0.4 * 0.5f64.powi(7 - j)).map(|r| (r, r.powf(1.5))).collect();
        let params = LemmaParams {
            alpha: 1.5,
            beta: 1.0,
            sigma_exp: 1.0,
            ..Default::default()
        };
        let v = check_lemma_a(&samples, &params)?;
        Ok((v.hypothesis_ok && v.conclusion_ok, format!("minimal C4 = {}", v.minimal_constant)))
    }));

    out.push(check("cutoff has unit mass", || {
        let mesh = DiscMesh::new(2, 65)?;
        let c = cutoff_eta(&[0.0, 0.0], 0.25, &mesh)?;
        let outside_zero = (0..mesh.node_count())
            .filter(|&k| mesh.class(k) != NodeClass::Exterior)
            .all(|k| {
                let x = mesh.position(k);
                x[0].hypot(x[1]) < 0.5 || c.eta.get(k) == 0.0
            });
        Ok(((c.mass - 1.0).abs() < 1e-12 && outside_zero, format!("mass {}", c.mass)))
    }));

    out
}
