//! Regularity diagnostics for computed fields: decay profiles of the Hessian
//! and gradient masses on concentric balls, Caccioppoli-type ratios, power-law
//! and Morrey exponent fits, Hölder seminorms, the interpolation inequality,
//! the exponential cutoff bound, and checkers for the two scale-iteration
//! lemmas.

mod cutoff;
mod holder;
mod lemmas;
mod profile;

pub use cutoff::{cutoff_eta, Cutoff};
pub use holder::{holder_seminorm, FieldView, HolderReport, HolderSampling, ALL_PAIRS_LIMIT};
pub use lemmas::{check_lemma_a, check_lemma_b, LemmaParams, LemmaVerdict, LEMMA_REL_TOL};
pub use profile::{
    caccioppoli_ratio, decay_profile, default_radii, fit_power_exponent, fit_power_law, geometric_radii,
    interpolation_check, morrey_exponent, PHI_NOISE_FLOOR, DecayProfile, InterpolationCheck, MorreyEstimate, PowerFit, Series,
};
