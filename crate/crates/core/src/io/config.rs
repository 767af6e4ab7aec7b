//! Run configuration in TOML.
//!
//! ```toml
//! n = 2
//! N = 65
//! p = 2
//! boundary = "saddle"              # affine | saddle | cubic | radial-quartic
//! # boundary = [[1.0, 3, 0], [-0.5, 1, 2]]   # terms [coef, e1, ..., en], degree <= 4
//! weight = "radial:0.5,1.0"        # or a positive number
//! eps_schedule = [0.1, 0.01, 0.001, 0.0001]
//! seed = 0
//! out_dir = "out"
//! ```
//!
//! Solver keys: `tol_grad`, `tol_energy`, `max_iter`, `init`. Diagnostic keys:
//! `center`, `radii` (explicit list) or `r_max`/`r_min`/`ratio`,
//! `caccioppoli_radii`, `holder_alphas`, `holder_radius`, `holder_pairs`,
//! `uniqueness_starts`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use toml::{Table, Value};

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::mesh::{norm, DiscMesh, ScalarField};
use crate::solver::{default_eps_schedule, Init, SolveConfig};

/// Polynomial `Σ c · x1^e1 ⋯ xn^en`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    /// Named boundary presets.
    pub fn preset(name: &str, dim: usize) -> Option<Self> {
        let mono = |c: f64, e: [u32; 3]| (c, e);
        let terms = match name {
            "affine" => {
                let mut t = vec![mono(1.0, [0, 0, 0]), mono(1.0, [1, 0, 0]), mono(-0.5, [0, 1, 0])];
                if dim == 3 {
                    t.push(mono(0.25, [0, 0, 1]));
                }
                t
            }
            "saddle" => vec![mono(0.5, [2, 0, 0]), mono(-0.5, [0, 2, 0])],
            "cubic" => vec![mono(1.0, [3, 0, 0])],
            "radial-quartic" => {
                // (Σ x_i²)², expanded.
                let mut t = Vec::new();
                for i in 0..dim {
                    for j in 0..dim {
                        let mut e = [0; 3];
                        e[i] += 2;
                        e[j] += 2;
                        t.push(mono(1.0, e));
                    }
                }
                t
            }
            _ => return None,
        };
        Some(Polynomial { terms })
    }

    pub fn field(&self, mesh: &Arc<DiscMesh>) -> ScalarField {
        ScalarField::from_fn(mesh, |x| self.eval(x))
    }
}

pub const PRESETS: [&str; 4] = ["affine", "saddle", "cubic", "radial-quartic"];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    /// Preset name, or `polynomial`.
    pub name: String,
    pub poly: Polynomial,
}

/// Weight `a(x)`: a positive constant or `c0 + c1 |x|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    Radial { c0: f64, c1: f64 },
}

impl WeightSpec {
    /// Lower bound `δ` of `a` on the closed unit ball.
    pub fn delta(&self) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::Radial { c0, c1 } => c0.min(c0 + c1),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::Radial { c0, c1 } => c0 + c1 * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("radial:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(format!("expected `radial:c0,c1`, got `{s}`"));
            }
            let c0: f64 = parts[0].parse().map_err(|_| format!("bad coefficient `{}`", parts[0]))?;
            let c1: f64 = parts[1].parse().map_err(|_| format!("bad coefficient `{}`", parts[1]))?;
            return Ok(WeightSpec::Radial { c0, c1 });
        }
        s.parse::<f64>()
            .map(WeightSpec::Constant)
            .map_err(|_| format!("expected a number or `radial:c0,c1`, got `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiiSpec {
    Explicit(Vec<f64>),
    /// `r_max · ratio^j` down to `r_min` (default `3h`).
    Geometric { r_max: f64, ratio: f64, r_min: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSpec {
    pub center: Vec<f64>,
    pub radii: RadiiSpec,
    pub caccioppoli_radii: Vec<f64>,
    pub holder_alphas: Vec<f64>,
    pub holder_radius: f64,
    pub holder_pairs: usize,
    /// Random starts for the uniqueness check; 0 disables it.
    pub uniqueness_starts: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub size: usize,
    pub p: f64,
    pub eps_schedule: Vec<f64>,
    pub weight: WeightSpec,
    pub boundary: BoundarySpec,
    pub tol_grad: f64,
    pub tol_energy: f64,
    pub max_iter: usize,
    pub init: Init,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub diagnostics: DiagnosticsSpec,
}

const KEYS: [&str; 22] = [
    "n",
    "N",
    "p",
    "eps_schedule",
    "weight",
    "boundary",
    "tol_grad",
    "tol_energy",
    "max_iter",
    "init",
    "seed",
    "out_dir",
    "center",
    "radii",
    "r_max",
    "r_min",
    "ratio",
    "caccioppoli_radii",
    "holder_alphas",
    "holder_radius",
    "holder_pairs",
    "uniqueness_starts",
];

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::validation(key, reason)
}

fn number(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, format!("expected a number, got {}", v.type_str()))),
    }
}

fn count(v: &Value, key: &str) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(bad(key, "expected a nonnegative integer")),
    }
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>> {
    match v {
        Value::Array(a) => a.iter().map(|x| number(x, key)).collect(),
        _ => Err(bad(key, format!("expected an array of numbers, got {}", v.type_str()))),
    }
}

fn opt<T>(t: &Table, key: &str, f: impl Fn(&Value, &str) -> Result<T>) -> Result<Option<T>> {
    t.get(key).map(|v| f(v, key)).transpose()
}

fn parse_boundary(v: &Value, dim: usize) -> Result<BoundarySpec> {
    const KEY: &str = "boundary";
    match v {
        Value::String(s) => Polynomial::preset(s, dim)
            .map(|poly| BoundarySpec { name: s.clone(), poly })
            .ok_or_else(|| bad(KEY, format!("unknown preset `{s}` (expected one of {})", PRESETS.join(", ")))),
        Value::Array(items) => {
            let mut terms = Vec::with_capacity(items.len());
            for item in items {
                let Value::Array(parts) = item else {
                    return Err(bad(KEY, "each term must be an array [coef, e1, ..., en]"));
                };
                if parts.len() != dim + 1 {
                    return Err(bad(KEY, format!("each term needs 1 + {dim} entries, got {}", parts.len())));
                }
                let coef = number(&parts[0], KEY)?;
                if !coef.is_finite() {
                    return Err(bad(KEY, "coefficients must be finite"));
                }
                let mut e = [0u32; 3];
                for (slot, part) in e.iter_mut().zip(&parts[1..]) {
                    *slot = u32::try_from(count(part, KEY)?).map_err(|_| bad(KEY, "exponent too large"))?;
                }
                terms.push((coef, e));
            }
            let poly = Polynomial { terms };
            if poly.degree() > 4 {
                return Err(bad(KEY, format!("total degree {} exceeds 4", poly.degree())));
            }
            Ok(BoundarySpec {
                name: "polynomial".into(),
                poly,
            })
        }
        _ => Err(bad(KEY, "expected a preset name or an array of terms")),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // Relative output directories are resolved against the config file.
        if cfg.out_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.out_dir = dir.join(&cfg.out_dir);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        if let Some(k) = t.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(bad(k, "unknown key"));
        }
        let required = |key: &str| t.get(key).ok_or_else(|| bad(key, "missing required key"));

        let dim = count(required("n")?, "n")? as usize;
        if dim != 2 && dim != 3 {
            return Err(bad("n", format!("dimension must be 2 or 3, got {dim}")));
        }
        let size = count(required("N")?, "N")? as usize;
        DiscMesh::new(dim, size).map_err(|e| bad("N", e.to_string()))?;
        let p = number(required("p")?, "p")?;
        if !(p >= 2.0) || !p.is_finite() {
            return Err(bad("p", format!("exponent must be at least 2, got {p}")));
        }
        let boundary = parse_boundary(required("boundary")?, dim)?;

        let eps_schedule = match opt(&t, "eps_schedule", numbers)? {
            Some(s) => s,
            None if p == 2.0 => vec![0.0],
            None => default_eps_schedule(),
        };
        let weight = match t.get("weight") {
            None => WeightSpec::Constant(1.0),
            Some(Value::String(s)) => WeightSpec::parse(s).map_err(|r| bad("weight", r))?,
            Some(v) => WeightSpec::Constant(number(v, "weight")?),
        };
        if !(weight.delta() > 0.0) || !weight.delta().is_finite() {
            return Err(bad("weight", format!("weight must be bounded below by a positive constant on the unit ball (min {})", weight.delta())));
        }

        let defaults = SolveConfig::default();
        let tol_grad = opt(&t, "tol_grad", number)?.unwrap_or(defaults.tol_grad);
        let tol_energy = opt(&t, "tol_energy", number)?.unwrap_or(defaults.tol_energy);
        let max_iter = opt(&t, "max_iter", count)?.map_or(defaults.max_iter, |v| v as usize);
        let init = match t.get("init") {
            None => defaults.init,
            Some(Value::String(s)) => Init::parse(s).ok_or_else(|| bad("init", format!("unknown init `{s}`")))?,
            Some(_) => return Err(bad("init", "expected a string")),
        };
        let seed = opt(&t, "seed", count)?.unwrap_or(0);
        let out_dir = match t.get("out_dir") {
            None => PathBuf::from("out"),
            Some(Value::String(s)) => PathBuf::from(s),
            Some(_) => return Err(bad("out_dir", "expected a string")),
        };
        let solve = SolveConfig {
            tol_grad,
            tol_energy,
            max_iter,
            eps_schedule: eps_schedule.clone(),
            init,
            seed,
        };
        if !(tol_grad > 0.0) {
            return Err(bad("tol_grad", "must be positive"));
        }
        if !(tol_energy > 0.0) {
            return Err(bad("tol_energy", "must be positive"));
        }
        if max_iter == 0 {
            return Err(bad("max_iter", "must be at least 1"));
        }
        solve.validate(p).map_err(|e| bad("eps_schedule", e.to_string()))?;

        let center = opt(&t, "center", numbers)?.unwrap_or_else(|| vec![0.0; dim]);
        if center.len() != dim {
            return Err(bad("center", format!("expected {dim} coordinates, got {}", center.len())));
        }
        let radii = match opt(&t, "radii", numbers)? {
            Some(r) => {
                if r.len() < 1 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("radii", "must be a nonempty strictly increasing list"));
                }
                RadiiSpec::Explicit(r)
            }
            None => {
                let r_max = opt(&t, "r_max", number)?.unwrap_or(0.4);
                let ratio = opt(&t, "ratio", number)?.unwrap_or(0.75);
                let r_min = opt(&t, "r_min", number)?;
                if !(r_max > 0.0) {
                    return Err(bad("r_max", "must be positive"));
                }
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(bad("ratio", "must lie in (0, 1)"));
                }
                if matches!(r_min, Some(r) if !(r > 0.0 && r <= r_max)) {
                    return Err(bad("r_min", "must lie in (0, r_max]"));
                }
                RadiiSpec::Geometric { r_max, ratio, r_min }
            }
        };
        let caccioppoli_radii = opt(&t, "caccioppoli_radii", numbers)?
            .unwrap_or_else(|| (0..6).map(|k| (10 + 5 * k) as f64 / 100.0).collect());
        if caccioppoli_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(bad("caccioppoli_radii", "radii must be positive"));
        }
        let holder_alphas = opt(&t, "holder_alphas", numbers)?.unwrap_or_else(|| vec![0.5]);
        if holder_alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(bad("holder_alphas", "exponents must lie in (0, 1]"));
        }
        let holder_radius = opt(&t, "holder_radius", number)?.unwrap_or(0.5);
        if !(holder_radius > 0.0) {
            return Err(bad("holder_radius", "must be positive"));
        }
        let holder_pairs = opt(&t, "holder_pairs", count)?.map_or(200_000, |v| v as usize);
        if holder_pairs == 0 {
            return Err(bad("holder_pairs", "must be at least 1"));
        }
        let uniqueness_starts = opt(&t, "uniqueness_starts", count)?.unwrap_or(0) as usize;
        if uniqueness_starts == 1 {
            return Err(bad("uniqueness_starts", "needs at least 2 starts (0 disables the check)"));
        }
        if norm(&center) >= 1.0 {
            return Err(bad("center", "must lie inside the unit ball"));
        }

        Ok(RunConfig {
            dim,
            size,
            p,
            eps_schedule,
            weight,
            boundary,
            tol_grad,
            tol_energy,
            max_iter,
            init,
            seed,
            out_dir,
            diagnostics: DiagnosticsSpec {
                center,
                radii,
                caccioppoli_radii,
                holder_alphas,
                holder_radius,
                holder_pairs,
                uniqueness_starts,
            },
        })
    }

    pub fn mesh(&self) -> Result<Arc<DiscMesh>> {
        DiscMesh::new(self.dim, self.size)
    }

    pub fn boundary_field(&self, mesh: &Arc<DiscMesh>) -> ScalarField {
        self.boundary.poly.field(mesh)
    }

    /// Energy model at `eps = 0`, with the weight attached unless it is `a ≡ 1`.
    pub fn model(&self, mesh: &Arc<DiscMesh>) -> Result<EnergyModel> {
        let model = EnergyModel::new(self.p, 0.0)?;
        if self.weight == WeightSpec::Constant(1.0) {
            return Ok(model);
        }
        let w = ScalarField::from_fn(mesh, |x| self.weight.eval(x));
        model.with_weight(w, self.weight.delta())
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            tol_grad: self.tol_grad,
            tol_energy: self.tol_energy,
            max_iter: self.max_iter,
            eps_schedule: self.eps_schedule.clone(),
            init: self.init,
            seed: self.seed,
        }
    }

    /// Profile radii for `mesh`.
    pub fn profile_radii(&self, mesh: &DiscMesh) -> Vec<f64> {
        match &self.diagnostics.radii {
            RadiiSpec::Explicit(r) => r.clone(),
            RadiiSpec::Geometric { r_max, ratio, r_min } => {
                crate::diagnostics::geometric_radii(*r_max, *ratio, r_min.unwrap_or(3.0 * mesh.h()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse("n = 2\nN = 65\np = 2\nboundary = \"saddle\"\n").unwrap();
        assert_eq!(cfg.eps_schedule, vec![0.0]);
        assert_eq!(cfg.weight, WeightSpec::Constant(1.0));
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.diagnostics.center, vec![0.0, 0.0]);
    }

    #[test]
    fn subquadratic_exponent_names_p() {
        let err = RunConfig::parse("n = 2\nN = 65\np = 1.5\nboundary = \"saddle\"\n").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "p"), "{err}");
    }

    #[test]
    fn radial_weight_bound() {
        let cfg = RunConfig::parse("n = 2\nN = 33\np = 2\nboundary = \"cubic\"\nweight = \"radial:0.5,1.0\"\n").unwrap();
        assert_eq!(cfg.weight, WeightSpec::Radial { c0: 0.5, c1: 1.0 });
        assert_eq!(cfg.weight.delta(), 0.5);
        assert_eq!(cfg.weight.eval(&[0.6, 0.8]), 1.5);
        let err = RunConfig::parse("n = 2\nN = 33\np = 2\nboundary = \"cubic\"\nweight = \"radial:0.5,-0.7\"\n").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "weight"));
    }

    #[test]
    fn polynomial_terms() {
        let cfg = RunConfig::parse("n = 2\nN = 33\np = 3\nboundary = [[2.0, 1, 1], [-1, 0, 3]]\n").unwrap();
        assert_eq!(cfg.boundary.poly.eval(&[0.5, 2.0]), 2.0 - 8.0);
        assert_eq!(cfg.eps_schedule, default_eps_schedule());
        let err = RunConfig::parse("n = 2\nN = 33\np = 2\nboundary = [[1.0, 3, 2]]\n").unwrap_err();
        assert!(matches!(&err, Error::Validation { key, .. } if key == "boundary"));
    }

    #[test]
    fn presets_match_closed_forms() {
        let x = [0.3, -0.7, 0.2];
        let q = Polynomial::preset("radial-quartic", 3).unwrap();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((q.eval(&x) - r2 * r2).abs() < 1e-15);
        let s = Polynomial::preset("saddle", 2).unwrap();
        assert!((s.eval(&x[..2]) - 0.5 * (0.09 - 0.49)).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_toml() {
        assert!(matches!(
            RunConfig::parse("n = 2\nN = 33\np = 2\nboundary = \"saddle\"\ncolour = 1\n"),
            Err(Error::Validation { .. })
        ));
        assert!(matches!(RunConfig::parse("n = = 2"), Err(Error::Parse(_))));
        assert!(matches!(
            RunConfig::parse("n = 2\nN = 34\np = 2\nboundary = \"saddle\"\n"),
            Err(Error::Validation { key, .. }) if key == "N"
        ));
    }
}
