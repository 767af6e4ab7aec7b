//! Minimizers of the Hessian energy `∫ a(x)^p |D²u|^p` on the unit ball with
//! prescribed boundary values, plus numerical diagnostics of their regularity:
//! decay profiles of `∫_{B_r} |D²u|^p`, Caccioppoli-type ratios, Morrey
//! exponents, Hölder seminorms, and checkers for scale-iteration lemmas.

pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod io;
pub mod mesh;
pub mod operators;
pub mod selftest;
pub mod solver;

pub use energy::{el_residual, energy, energy_gradient, pairing, EnergyModel};
pub use error::{Error, ErrorClass, Result};
pub use mesh::{integrate_annulus, integrate_ball, DiscMesh, NodeClass, ScalarField};
pub use operators::{frob_norm, gradient, hessian, HessianField, VectorField};
