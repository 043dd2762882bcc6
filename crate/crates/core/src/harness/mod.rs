//! Experiment orchestration behind the command-line front end.

pub mod config;
pub mod lemma_suite;
pub mod output;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::blowup_theory::{compute_constants, BlowupConstants, SAFETY_FACTOR};
use crate::error::Result;
use crate::evolution::ProblemParams;
use crate::frac_operator::{normalization_constant, PVQuadratureConfig};
use crate::lemma_verifier::LemmaPlan;

pub use config::Config;
pub use lemma_suite::{run_lemma_suite, LemmaSuiteReport};
pub use output::{Manifest, SCHEMA};
pub use sweep::{fit_power_law, run_sweep, PowerLawFit, SweepPlan, SweepResult, SweepRow};

/// Every constant of a run together with the tolerances it was computed to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub params: ProblemParams,
    pub normalization: f64,
    pub normalization_error: f64,
    pub a_hat: f64,
    /// `configured` or `sampled`.
    pub a_hat_source: String,
    pub safety_factor: f64,
    pub blowup: BlowupConstants,
    pub quadrature: PVQuadratureConfig,
    pub lemma_plan: LemmaPlan,
}

/// Samples `A_hat` unless it is given and evaluates `B`, `W`, `C` and `D`.
pub fn constants_report(
    params: &ProblemParams,
    a_hat: Option<f64>,
    cfg: &PVQuadratureConfig,
    plan: &LemmaPlan,
) -> Result<ConstantsReport> {
    cfg.validate()?;
    let b = normalization_constant(params.n, cfg)?;
    let (a_hat, source) = match a_hat {
        Some(a) => (a, "configured"),
        None => (
            sweep::sample_decay_constant(params.n, cfg, plan)?.0,
            "sampled",
        ),
    };
    let blowup = compute_constants(params, SAFETY_FACTOR * a_hat, cfg)?;
    Ok(ConstantsReport {
        params: *params,
        normalization: b.value,
        normalization_error: b.error,
        a_hat,
        a_hat_source: source.into(),
        safety_factor: SAFETY_FACTOR,
        blowup,
        quadrature: *cfg,
        lemma_plan: plan.clone(),
    })
}
