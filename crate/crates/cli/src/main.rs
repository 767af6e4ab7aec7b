use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hessmin::diagnostics::LemmaParams;
use hessmin::io::{self, DiagnosticsSpec, Report, RunConfig};
use hessmin::solver::solve_linear_oracle;
use hessmin::{EnergyModel, Error, ErrorClass};

#[derive(Parser)]
#[command(name = "hessmin", version, about = "Minimize Hessian energies on the unit ball and diagnose the minimizers")]
struct Cli {
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, diagnose and write field, profile and report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to `out_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decay profile and exponents of a stored field.
    Diagnose {
        #[arg(long)]
        field: PathBuf,
        /// Comma-separated center, e.g. `0,0`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Vec<f64>,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
        /// Integrand exponent (defaults to the dimension).
        #[arg(long)]
        p: Option<f64>,
        /// Hölder exponents for `Du` over `B_{1/2}`.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        alphas: Vec<f64>,
    },
    /// Direct linear solve (p = 2 only).
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the scale-iteration hypothesis on a profile CSV.
    Lemmas {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        c2: f64,
        /// Target decay exponent of the conclusion.
        #[arg(long)]
        sigma: f64,
        /// Conclusion constant to test (the fitted minimum when omitted).
        #[arg(long)]
        c4: Option<f64>,
        /// Directory for `lemmas.txt`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the built-in property checks.
    Selftest,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Solver => 3,
        ErrorClass::Diagnostics => 4,
        ErrorClass::Io => 5,
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn log_radii(rmin: f64, rmax: f64, levels: usize) -> Result<Vec<f64>, Error> {
    if !(rmin > 0.0 && rmax > rmin) || levels < 2 {
        return Err(Error::InvalidArg(format!(
            "need 0 < rmin < rmax and at least 2 levels (rmin={rmin}, rmax={rmax}, levels={levels})"
        )));
    }
    let step = (rmax / rmin).ln() / (levels - 1) as f64;
    Ok((0..levels).map(|j| rmin * (step * j as f64).exp()).collect())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve { config, out } => {
            let mut cfg = load(&config, cli.seed)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let res = io::run_pipeline(&cfg)?;
            print!("{}", res.report.render());
            eprintln!("wrote {}", res.report_path.display());
        }
        Command::Diagnose {
            field,
            center,
            rmin,
            rmax,
            levels,
            out,
            p,
            alphas,
        } => {
            let u = io::read_field(&field)?;
            let dim = u.mesh().dim();
            if center.len() != dim {
                return Err(Error::InvalidArg(format!("center needs {dim} coordinates, got {}", center.len())));
            }
            let model = EnergyModel::new(p.unwrap_or(dim as f64), 0.0)?;
            let radii = log_radii(rmin, rmax, levels)?;
            let spec = DiagnosticsSpec {
                center,
                radii: io::RadiiSpec::Explicit(radii.clone()),
                caccioppoli_radii: Vec::new(),
                holder_alphas: alphas,
                holder_radius: 0.5,
                holder_pairs: 200_000,
                uniqueness_starts: 0,
            };
            let mut report = Report::default();
            report.push("field", field.display());
            report.num("p", model.p());
            let profile = io::diagnose_field(&u, &model, &spec, &radii, &mut report)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            io::write_profile_csv(&profile, &out.join("profile.csv"))?;
            report.write(&out.join("report.txt"))?;
            print!("{}", report.render());
        }
        Command::Oracle { config, out } => {
            let cfg = load(&config, cli.seed)?;
            let mesh = cfg.mesh()?;
            let g = cfg.boundary_field(&mesh);
            let model = cfg.model(&mesh)?;
            let u = solve_linear_oracle(&model, &g)?;
            let out = out.unwrap_or(cfg.out_dir);
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            let path = out.join("oracle.field");
            io::write_field(&u, &path)?;
            println!("energy={}", hessmin::energy(&model, &u)?);
            println!("field={}", path.display());
        }
        Command::Lemmas {
            profile,
            c1,
            alpha,
            beta,
            mu,
            c2,
            sigma,
            c4,
            out,
        } => {
            let rows = io::read_profile_csv(&profile)?;
            let params = LemmaParams {
                c1,
                alpha,
                beta,
                mu,
                c2,
                sigma_exp: sigma,
                c4,
                ..Default::default()
            };
            let (_, report) = io::lemma_report(&rows, &params)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            report.write(&out.join("lemmas.txt"))?;
            print!("{}", report.render());
        }
        Command::Selftest => {
            let checks = hessmin::selftest::run(cli.seed.unwrap_or(0));
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", checks.len());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
