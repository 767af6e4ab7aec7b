//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use hessmin::diagnostics::{
    caccioppoli_ratio, check_lemma_a, cutoff_eta, decay_profile, fit_power_exponent, holder_seminorm, morrey_exponent,
    HolderSampling, LemmaParams, Series,
};
use hessmin::io::{read_field, write_field, Polynomial};
use hessmin::solver::{minimize, minimize_from, solve_linear_oracle, uniqueness_check, SolveConfig, SolveReport};
use hessmin::{energy, energy_gradient, gradient, pairing, DiscMesh, EnergyModel, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_poly(rng: &mut ChaCha8Rng) -> Polynomial {
    let mut terms = Vec::new();
    for d in 0..=4u32 {
        for i in 0..=d {
            terms.push((rng.gen_range(-1.0..1.0), [i, d - i, 0]));
        }
    }
    Polynomial { terms }
}

fn quadratic_reproduction(reports: &mut Vec<SolveReport>) -> Outcome {
    let mesh = DiscMesh::new(2, 65).unwrap();
    let g = Polynomial::preset("saddle", 2).unwrap().field(&mesh);
    let model = EnergyModel::new(2.0, 0.0).unwrap();
    let t = Instant::now();
    let (u, rep) = minimize(&model, &g, &SolveConfig::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let err = u.sup_diff(&g);
    reports.push(rep);
    outcome(
        err <= 1e-6 && secs < 60.0,
        format!("sup error {err:.2e} (<= 1e-6), {secs:.1} s (< 60 s)"),
    )
}

fn energy_quadrature() -> Outcome {
    let half_r2 = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
    let m2 = DiscMesh::new(2, 257).unwrap();
    let e2 = energy(&EnergyModel::new(2.0, 0.0).unwrap(), &ScalarField::from_fn(&m2, half_r2)).unwrap();
    let m3 = DiscMesh::new(3, 65).unwrap();
    let e3 = energy(&EnergyModel::new(3.0, 0.0).unwrap(), &ScalarField::from_fn(&m3, half_r2)).unwrap();
    let r2 = (e2 - 2.0 * PI).abs() / (2.0 * PI);
    let target3 = 4.0 * 3f64.sqrt() * PI;
    let r3 = (e3 - target3).abs() / target3;
    outcome(
        r2 <= 0.02 && r3 <= 0.05,
        format!("n=p=2: {e2:.5} (rel {r2:.2e} <= 0.02); n=p=3: {e3:.4} vs {target3:.4} (rel {r3:.2e} <= 0.05)"),
    )
}

fn oracle_equivalence(reports: &mut Vec<SolveReport>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mesh = DiscMesh::new(2, 17).unwrap();
    let model = EnergyModel::new(2.0, 0.0).unwrap();
    let cfg = SolveConfig {
        tol_grad: 1e-12,
        max_iter: 100_000,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let g = random_poly(&mut rng).field(&mesh);
        let exact = solve_linear_oracle(&model, &g).unwrap();
        let (u, rep) = minimize(&model, &g, &cfg).unwrap();
        worst = worst.max(u.sup_diff(&exact));
        reports.push(rep);
    }
    outcome(worst <= 1e-8, format!("max sup difference over 3 data {worst:.2e} (<= 1e-8)"))
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let (dim, size) = if case % 5 == 4 { (3, 17) } else { (2, 17 + 16 * (case % 2)) };
        let mesh = DiscMesh::new(dim, size).unwrap();
        let p = rng.gen_range(2.0..4.5);
        let eps = 10f64.powf(rng.gen_range(-3.0..-1.0));
        let mut model = EnergyModel::new(p, eps).unwrap();
        if case % 3 == 0 {
            let (c0, c1) = (rng.gen_range(0.5..1.5), rng.gen_range(-0.4..1.0));
            let w = ScalarField::from_fn(&mesh, |x| c0 + c1 * x.iter().map(|v| v * v).sum::<f64>());
            model = model.with_weight(w, c0.min(c0 + c1)).unwrap();
        }
        let poly = random_poly(&mut rng);
        let mut u = poly.field(&mesh);
        let mut v = ScalarField::zeros(&mesh);
        for &k in mesh.interior_nodes() {
            u.values_mut()[k] += 0.05 * rng.gen_range(-1.0..1.0);
            v.values_mut()[k] = rng.gen_range(-1.0..1.0);
        }
        let shifted = |s: f64| {
            let vals = u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect();
            ScalarField::from_values(&mesh, vals).unwrap()
        };
        let t = 1e-5;
        let fd = (energy(&model, &shifted(t)).unwrap() - energy(&model, &shifted(-t)).unwrap()) / (2.0 * t);
        let an = pairing(&energy_gradient(&model, &u).unwrap(), &v);
        worst = worst.max((fd - an).abs() / an.abs());
    }
    outcome(worst <= 1e-5, format!("max relative error over 20 triples {worst:.2e} (<= 1e-5)"))
}

fn monotone_descent(reports: &[SolveReport]) -> Outcome {
    let violations: usize = reports.iter().map(|r| r.monotonicity_violations()).sum();
    let steps: usize = reports.iter().map(|r| r.iterations()).sum();
    outcome(
        violations == 0 && reports.len() == 4,
        format!("{violations} increases over {steps} accepted steps in {} solves", reports.len()),
    )
}

fn decay_exponent() -> Outcome {
    let mesh = DiscMesh::new(2, 257).unwrap();
    let g = Polynomial::preset("saddle", 2).unwrap().field(&mesh);
    let model = EnergyModel::new(2.0, 0.0).unwrap();
    let u = solve_linear_oracle(&model, &g).unwrap();
    let radii: Vec<f64> = (0..7).map(|j| 0.1 * 4f64.powf(j as f64 / 6.0)).collect();
    let prof = decay_profile(&u, &model, &[0.0, 0.0], &radii).unwrap();
    let fit = fit_power_exponent(&prof, Series::Phi).unwrap();
    let m = morrey_exponent(&prof, &model).unwrap();
    outcome(
        (fit.beta - 2.0).abs() <= 0.05 && (m.raw - 1.0).abs() <= 0.03 && (m.alpha - 1.0).abs() <= 0.03,
        format!(
            "beta {:.4} (2 +- 0.05), beta/p {:.4} reported as {:.4}{} (1 +- 0.03)",
            fit.beta,
            m.raw,
            m.alpha,
            if m.clamped { " after clamp" } else { "" }
        ),
    )
}

fn caccioppoli_boundedness() -> Outcome {
    let radii: Vec<f64> = (0..6).map(|k| (10 + 5 * k) as f64 / 100.0).collect();
    let model = EnergyModel::new(2.0, 0.0).unwrap();
    let mesh = DiscMesh::new(2, 65).unwrap();
    let mut spreads = Vec::new();
    let mut ok = true;
    for preset in ["saddle", "cubic"] {
        let g = Polynomial::preset(preset, 2).unwrap().field(&mesh);
        let (u, _) = minimize(&model, &g, &SolveConfig::default()).unwrap();
        let ratios: Vec<f64> = radii
            .iter()
            .map(|&r| caccioppoli_ratio(&u, &model, &[0.0, 0.0], r, true).unwrap())
            .collect();
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        ok &= min > 0.0 && max / min <= 10.0;
        spreads.push(format!("{preset} max/min {:.3}", max / min));
    }
    let fine = DiscMesh::new(2, 257).unwrap();
    let para = ScalarField::from_fn(&fine, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    let mut worst = 0.0f64;
    for &r in &radii {
        let v = caccioppoli_ratio(&para, &model, &[0.0, 0.0], r, true).unwrap();
        worst = worst.max((v / (4.0 / 15.0) - 1.0).abs());
    }
    ok &= worst <= 0.05;
    outcome(
        ok,
        format!("{} (<= 10); |x|^2/2 worst deviation from 4/15 {:.2}% (<= 5%)", spreads.join(", "), 100.0 * worst),
    )
}

fn uniqueness() -> Outcome {
    let mesh = DiscMesh::new(2, 33).unwrap();
    let g = ScalarField::from_fn(&mesh, |x| x[0].exp() * x[1].cos());
    let model = EnergyModel::new(3.0, 0.0).unwrap();
    let cfg = SolveConfig {
        max_iter: 100_000,
        seed: 1,
        ..Default::default()
    };
    let t = Instant::now();
    let diff = uniqueness_check(&model, &g, &cfg, 2).unwrap();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        diff <= 1e-4 && secs < 120.0,
        format!(
            "eps_final {:e}, sup difference {diff:.2e} (<= 1e-4), {secs:.1} s (< 120 s)",
            cfg.eps_schedule.last().unwrap()
        ),
    )
}

fn du_seminorm(u: &ScalarField, alpha: f64) -> f64 {
    let h = holder_seminorm(&gradient(u), alpha, 0.5, HolderSampling::Auto { count: 200_000, seed: 0 }).unwrap();
    h.seminorm
}

fn holder_stability() -> Outcome {
    let model = EnergyModel::new(2.0, 0.0).unwrap();
    let mut s = Vec::new();
    for size in [65, 129] {
        let mesh = DiscMesh::new(2, size).unwrap();
        let g = Polynomial::preset("radial-quartic", 2).unwrap().field(&mesh);
        let (u, _) = minimize(&model, &g, &SolveConfig::default()).unwrap();
        s.push(du_seminorm(&u, 0.5));
    }
    let change = (s[1] - s[0]).abs() / s[0];
    outcome(
        change <= 0.20,
        format!(
            "radial-quartic [Du]_(1/2): N=65 {:.4}, N=129 {:.4}, change {:.2}% (<= 20%)",
            s[0],
            s[1],
            100.0 * change
        ),
    )
}

fn supercritical_sweep() -> Outcome {
    let model = EnergyModel::new(4.0, 0.0).unwrap();
    let linear = EnergyModel::new(2.0, 0.0).unwrap();
    let cfg = SolveConfig {
        max_iter: 3000,
        eps_schedule: vec![1e-2, 1e-4],
        ..Default::default()
    };
    let mut s = Vec::new();
    let mut notes = Vec::new();
    for size in [65, 129] {
        let mesh = DiscMesh::new(2, size).unwrap();
        let g = Polynomial::preset("cubic", 2).unwrap().field(&mesh);
        // The p = 2 minimizer is a cheap, much closer starting point than g itself.
        let u0 = solve_linear_oracle(&linear, &g).unwrap();
        let (u, rep) = minimize_from(&model, u0, &cfg).unwrap();
        s.push(du_seminorm(&u, 0.6));
        notes.push(format!("N={size} grad {:.1e}", rep.final_grad_norm));
    }
    let change = (s[1] - s[0]).abs() / s[0];
    outcome(
        s.iter().all(|v| v.is_finite()) && change <= 0.25,
        format!(
            "cubic, p=4 [Du]_(0.6): N=65 {:.4}, N=129 {:.4}, change {:.2}% (<= 25%); {}",
            s[0],
            s[1],
            100.0 * change,
            notes.join(", ")
        ),
    )
}

fn lemma_checkers() -> Outcome {
    let radii: Vec<f64> = (0..10).map(|j| 0.4 * 0.7f64.powi(9 - j)).collect();
    let brute_c4 = |phi: &[(f64, f64)], s: f64| phi.iter().map(|&(r, v)| v / r.powf(s)).fold(0.0, f64::max);
    let mut cases = 0;
    let mut right = 0;
    let mut c4_exact = true;
    let mut record = |hyp_expected: bool, samples: Vec<(f64, f64)>, params: LemmaParams| {
        let v = check_lemma_a(&samples, &params).unwrap();
        let pairs = samples.len() * (samples.len() - 1) / 2;
        let designed = if hyp_expected {
            v.hypothesis_ok && v.hypothesis_violations.is_empty()
        } else {
            !v.hypothesis_ok && v.hypothesis_violations.len() == pairs
        };
        let c4 = brute_c4(&samples, params.sigma_exp);
        c4_exact &= v.minimal_constant == c4;
        let sound = check_lemma_a(&samples, &LemmaParams { c4: Some(c4), ..params }).unwrap().conclusion_ok;
        cases += 1;
        right += usize::from(designed && sound);
    };
    // Exact power laws pass with equality.
    for (alpha, beta) in [(1.0, 0.5), (1.5, 0.5), (1.5, 1.0), (2.0, 0.8), (2.0, 1.5), (2.5, 2.0)] {
        let samples = radii.iter().map(|&r| (r, r.powf(alpha))).collect();
        let params = LemmaParams {
            alpha,
            beta,
            sigma_exp: beta,
            ..Default::default()
        };
        record(true, samples, params);
    }
    // Constants violate every pair r < R.
    for (alpha, beta) in [(1.0, 0.5), (2.0, 1.0), (3.0, 2.0)] {
        let samples = radii.iter().map(|&r| (r, 1.0)).collect();
        let params = LemmaParams {
            alpha,
            beta,
            sigma_exp: beta,
            ..Default::default()
        };
        record(false, samples, params);
    }
    // r^alpha + 0.1 r^beta needs the C2 R^beta term.
    for (alpha, beta) in [(1.0, 0.5), (2.0, 1.0), (2.0, 1.5)] {
        let samples = radii.iter().map(|&r| (r, r.powf(alpha) + 0.1 * r.powf(beta))).collect();
        let params = LemmaParams {
            alpha,
            beta,
            c2: 0.1,
            sigma_exp: beta,
            ..Default::default()
        };
        record(true, samples, params);
    }
    outcome(
        cases == 12 && right == 12 && c4_exact,
        format!("{right}/{cases} designed verdicts, minimal C4 equals brute-force scan: {c4_exact}"),
    )
}

fn cutoff_bound() -> Outcome {
    let mesh = DiscMesh::new(2, 257).unwrap();
    let r = 0.25;
    let c = cutoff_eta(&[0.0, 0.0], r, &mesh).unwrap();
    // Independent radial oracle: mass and sup of |Dη|²/η from 1-D sampling.
    let samples = 100_000;
    let rho_max = 2.0 * r;
    let d = rho_max / samples as f64;
    let mut mass = 0.0;
    let mut peak = 0.0f64;
    for i in 0..samples {
        let rho = (i as f64 + 0.5) * d;
        let t = rho * rho - 4.0 * r * r;
        let bump = (1.0 / t).exp();
        mass += bump * 2.0 * PI * rho * d;
        let deta = bump * 2.0 * rho / (t * t);
        peak = peak.max(deta * deta / bump);
    }
    let oracle = peak / mass;
    let rel = (c.max_ratio - oracle).abs() / oracle;
    let mut finite = true;
    for (x0, rr) in [([0.0, 0.0], 0.1), ([0.3, -0.2], 0.15), ([-0.5, 0.1], 0.2), ([0.0, 0.6], 0.2)] {
        let cc = cutoff_eta(&x0, rr, &mesh).unwrap();
        finite &= cc.max_ratio.is_finite() && cc.max_ratio > 0.0;
    }
    outcome(
        (c.mass - 1.0).abs() <= 0.01 && rel <= 0.02 && finite,
        format!(
            "mass {:.12}, max ratio {:.5e} vs radial oracle {oracle:.5e} (rel {rel:.2e} <= 0.02), finite at 4 more centers: {finite}",
            c.mass, c.max_ratio
        ),
    )
}

fn file_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let dir = tempfile::tempdir().unwrap();
    let meshes: Vec<Arc<DiscMesh>> = vec![
        DiscMesh::new(2, 17).unwrap(),
        DiscMesh::new(2, 33).unwrap(),
        DiscMesh::new(3, 17).unwrap(),
    ];
    let mut exact = 0;
    for i in 0..50 {
        let mesh = &meshes[i % meshes.len()];
        let u = ScalarField::from_fn(mesh, |_| {
            let mant: f64 = rng.gen_range(-1.0..1.0);
            mant * 10f64.powi(rng.gen_range(-300..300))
        });
        let path = dir.path().join(format!("f{i}.field"));
        write_field(&u, &path).unwrap();
        let back = read_field(&path).unwrap();
        if u.values().iter().zip(back.values()).all(|(a, b)| a.to_bits() == b.to_bits()) {
            exact += 1;
        }
    }
    outcome(exact == 50, format!("{exact}/50 bit-exact"))
}

fn main() {
    let mut descent_reports = Vec::new();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let mut o = f();
        o.detail = format!("{} [{:.1} s]", o.detail, t.elapsed().as_secs_f64());
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    run("1 quadratic reproduction", &mut || quadratic_reproduction(&mut descent_reports));
    run("2 energy quadrature", &mut energy_quadrature);
    run("3 oracle equivalence", &mut || oracle_equivalence(&mut descent_reports));
    run("4 gradient correctness", &mut gradient_correctness);
    run("5 monotone descent", &mut || monotone_descent(&descent_reports));
    run("6 decay exponent", &mut decay_exponent);
    run("7 caccioppoli boundedness", &mut caccioppoli_boundedness);
    run("8 uniqueness", &mut uniqueness);
    run("9 holder stability", &mut holder_stability);
    run("10 supercritical sweep", &mut supercritical_sweep);
    run("11 lemma checkers", &mut lemma_checkers);
    run("12 cutoff bound", &mut cutoff_bound);
    run("13 file round trip", &mut file_round_trip);
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
