//! Configuration, file formats and the solve-then-diagnose pipeline.

mod config;
mod field_file;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{BoundarySpec, DiagnosticsSpec, Polynomial, RadiiSpec, RunConfig, WeightSpec, PRESETS};
pub use field_file::{format_field, parse_field, read_field, write_field, FIELD_MAGIC};
pub(crate) use field_file::write_atomic;

use crate::diagnostics::{
    caccioppoli_ratio, check_lemma_a, decay_profile, holder_seminorm, morrey_exponent, DecayProfile,
    HolderSampling, LemmaParams, LemmaVerdict,
};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::mesh::ScalarField;
use crate::operators::gradient;
use crate::solver::{minimize, uniqueness_check, SolveReport};

pub const PROFILE_HEADER: &str = "r,phi,sigma";

pub fn format_profile_csv(profile: &DecayProfile) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for ((r, phi), sigma) in profile.radii.iter().zip(&profile.phi).zip(&profile.sigma) {
        let _ = writeln!(out, "{r:.16e},{phi:.16e},{sigma:.16e}");
    }
    out
}

pub fn write_profile_csv(profile: &DecayProfile, path: &Path) -> Result<()> {
    write_atomic(path, format_profile_csv(profile).as_bytes())
}

/// Rows `(r, phi, sigma)` of a profile CSV.
pub fn read_profile_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(PROFILE_HEADER) {
        return Err(Error::format(path, format!("expected header `{PROFILE_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(path, format!("unparsable row {}", i + 2)))?;
        if cols.len() != 3 {
            return Err(Error::format(path, format!("row {} has {} columns, expected 3", i + 2, cols.len())));
        }
        rows.push((cols[0], cols[1], cols[2]));
    }
    Ok(rows)
}

/// Ordered `key=value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    /// Pushes a float in shortest round-trip scientific notation.
    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), format!("{value:e}")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Profile, Morrey fit, Caccioppoli ratios and Hölder seminorms of `u`.
///
/// Fit failures and degenerate ratios are recorded in the report; region
/// errors propagate.
pub fn diagnose_field(
    u: &ScalarField,
    model: &EnergyModel,
    spec: &DiagnosticsSpec,
    radii: &[f64],
    report: &mut Report,
) -> Result<DecayProfile> {
    let profile = decay_profile(u, model, &spec.center, radii)?;
    report.push("profile_radii", profile.radii.len());
    match morrey_exponent(&profile, model) {
        Ok(m) => {
            report.num("beta", m.beta);
            report.num("alpha", m.alpha);
            report.num("alpha_raw", m.raw);
            report.push("alpha_clamped", m.clamped);
        }
        Err(e @ Error::InsufficientData(_)) => {
            report.push("beta", "NA");
            report.push("beta_error", format!("InsufficientData: {e}"));
        }
        Err(e) => return Err(e),
    }
    for &r in &spec.caccioppoli_radii {
        let key = format!("caccioppoli_normalized[{r}]");
        match caccioppoli_ratio(u, model, &spec.center, r, true) {
            Ok(v) => report.num(key, v),
            Err(e @ (Error::DegenerateDenominator(_) | Error::RegionOutOfRange(_))) => {
                report.push(key, format!("NA ({e})"))
            }
            Err(e) => return Err(e),
        }
    }
    let du = gradient(u);
    for &alpha in &spec.holder_alphas {
        let h = holder_seminorm(
            &du,
            alpha,
            spec.holder_radius,
            HolderSampling::Auto {
                count: spec.holder_pairs,
                seed: 0,
            },
        )?;
        report.num(format!("holder_du[{alpha}]"), h.seminorm);
        report.push(format!("holder_du_pairs[{alpha}]"), h.pairs);
    }
    Ok(profile)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub field_path: PathBuf,
    pub profile_path: PathBuf,
    pub report_path: PathBuf,
    pub report: Report,
    pub solve: SolveReport,
    pub minimizer: ScalarField,
}

fn push_solve(report: &mut Report, s: &SolveReport) {
    report.num("final_energy", s.final_energy);
    report.num("final_eps", s.final_eps);
    report.num("final_stage_energy", s.final_stage_energy);
    report.push("iterations", s.iterations());
    report.push(
        "stage_iterations",
        s.stages.iter().map(|st| st.iterations.to_string()).collect::<Vec<_>>().join(","),
    );
    report.num("grad_norm", s.final_grad_norm);
    report.push("converged", s.converged());
    report.push("max_iter_hit", s.max_iter_hit());
    report.push("monotonicity_violations", s.monotonicity_violations());
}

/// Solves, diagnoses and writes `minimizer.field`, `profile.csv` and
/// `report.txt` into `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    let mesh = cfg.mesh()?;
    let g = cfg.boundary_field(&mesh);
    let model = cfg.model(&mesh)?;
    let solve_cfg = cfg.solve_config();
    create_dir(&cfg.out_dir)?;

    let mut report = Report::default();
    report.push("n", cfg.dim);
    report.push("N", cfg.size);
    report.num("p", cfg.p);
    report.push("boundary", &cfg.boundary.name);
    report.num("weight_delta", cfg.weight.delta());
    report.push("seed", cfg.seed);

    let (u, solve) = minimize(&model, &g, &solve_cfg)?;
    push_solve(&mut report, &solve);
    if cfg.diagnostics.uniqueness_starts >= 2 {
        let diff = uniqueness_check(&model, &g, &solve_cfg, cfg.diagnostics.uniqueness_starts)?;
        report.push("uniqueness_starts", cfg.diagnostics.uniqueness_starts);
        report.num("uniqueness_max_diff", diff);
    }
    let radii = cfg.profile_radii(&mesh);
    let profile = diagnose_field(&u, &model, &cfg.diagnostics, &radii, &mut report)?;
    report.num("wall_time_s", solve.wall_time_s);

    let field_path = cfg.out_dir.join("minimizer.field");
    let profile_path = cfg.out_dir.join("profile.csv");
    let report_path = cfg.out_dir.join("report.txt");
    write_field(&u, &field_path)?;
    write_profile_csv(&profile, &profile_path)?;
    report.write(&report_path)?;
    Ok(PipelineOutput {
        field_path,
        profile_path,
        report_path,
        report,
        solve,
        minimizer: u,
    })
}

/// Runs the lemma-A checker on the `(r, phi)` columns of a profile CSV.
pub fn lemma_report(rows: &[(f64, f64, f64)], params: &LemmaParams) -> Result<(LemmaVerdict, Report)> {
    let samples: Vec<(f64, f64)> = rows.iter().map(|&(r, phi, _)| (r, phi)).collect();
    let verdict = check_lemma_a(&samples, params)?;
    let mut report = Report::default();
    report.push("samples", samples.len());
    report.push("hypothesis_ok", verdict.hypothesis_ok);
    report.push("conclusion_ok", verdict.conclusion_ok);
    report.num("minimal_c4", verdict.minimal_constant);
    report.push("hypothesis_violations", verdict.hypothesis_violations.len());
    let pairs: Vec<String> = verdict
        .hypothesis_violations
        .iter()
        .map(|(r, big)| format!("({r:e};{big:e})"))
        .collect();
    report.push("violating_pairs", pairs.join(","));
    Ok((verdict, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiscMesh;

    #[test]
    fn profile_csv_round_trip() {
        let mesh = DiscMesh::new(2, 65).unwrap();
        let u = ScalarField::from_fn(&mesh, |x| x[0].powi(3));
        let m = EnergyModel::new(2.0, 0.0).unwrap();
        let prof = decay_profile(&u, &m, &[0.0, 0.0], &[0.1, 0.2, 0.3]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_profile_csv(&prof, &path).unwrap();
        let rows = read_profile_csv(&path).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, (r, phi)) in rows.iter().zip(prof.radii.iter().zip(&prof.phi)) {
            assert_eq!(row.0, *r);
            assert!((row.1 - phi).abs() <= 1e-15 * phi.abs());
        }
    }

    #[test]
    fn report_renders_in_order() {
        let mut r = Report::default();
        r.push("b", 1);
        r.push("a", "x");
        assert_eq!(r.render(), "b=1\na=x\n");
        assert_eq!(r.get("a"), Some("x"));
    }
}
