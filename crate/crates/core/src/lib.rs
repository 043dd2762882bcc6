//! Numerical experiments on the half-wave equation `i u_t + (-Δ)^{1/2} u = λ|u|^p`:
//! the half Laplacian of algebraic weights, a split-step solver with blow-up
//! detection, and the explicit blow-up constants and lifespan bounds.

pub mod blowup_theory;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod frac_operator;
pub mod grid;
pub mod harness;
pub mod lemma_verifier;
pub mod quad;

pub use error::{Error, Result};
pub use grid::{Field, GridSpec};
