//! Lifespan-versus-amplitude sweeps and power-law fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blowup_theory::{
    compute_constants, corollary_radius, make_initial_data, BlowupConstants, CorollaryReport,
    DataKind, InitialDataSpec, SAFETY_FACTOR,
};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig, ProblemParams, StopReason, TrajectoryRecord};
use crate::fit::{fit_line, log_space};
use crate::frac_operator::{normalization_constant, PVQuadratureConfig, WeightProfile};
use crate::lemma_verifier::{verify_lemma, LemmaPlan};

/// Least-squares fit of `log T = exponent * log μ + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS residual in natural-log units.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 (μ, T) pairs, got {}",
            pairs.len()
        )));
    }
    if pairs
        .iter()
        .any(|&(m, t)| !(m > 0.0 && t > 0.0 && m.is_finite() && t.is_finite()))
    {
        return Err(Error::Fit("pairs must be positive and finite".into()));
    }
    let mut mus: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    mus.sort_by(f64::total_cmp);
    if mus.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("amplitudes must be distinct".into()));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&x, &y)?;
    Ok(PowerLawFit {
        exponent: fit.slope,
        intercept: fit.intercept,
        residual: fit.rms,
        points: pairs.len(),
    })
}

/// Where the decay constant fed into `C` came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecaySource {
    Configured,
    /// Sampled by the lemma verifier with the given plan.
    Sampled {
        plan: LemmaPlan,
        normalization: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub params: ProblemParams,
    pub kind: DataKind,
    pub k: f64,
    pub mus: Vec<f64>,
    /// Base evolution settings; the step and horizon are tightened per run.
    pub evolution: EvolutionConfig,
    pub horizon_factor: f64,
    pub steps_per_bound: f64,
    pub quadrature: PVQuadratureConfig,
    /// Decay constant `A_hat`; sampled when `None`.
    pub a_hat: Option<f64>,
    pub workers: usize,
    /// Keep every trajectory in the result.
    pub keep_trajectories: bool,
}

impl SweepPlan {
    /// `count` log-spaced amplitudes in `[mu_min, mu_max]`.
    pub fn amplitudes(mu_min: f64, mu_max: f64, count: usize) -> Vec<f64> {
        log_space(mu_min, mu_max, count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == DataKind::Integrable {
            return Err(Error::InvalidParameter(
                "sweeps need inner-singular or outer-decay data".into(),
            ));
        }
        if self.mus.is_empty() || self.mus.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(
                "amplitudes must be positive and finite".into(),
            ));
        }
        if !(self.horizon_factor >= 1.0) || !(self.steps_per_bound > 0.0) {
            return Err(Error::InvalidParameter(
                "horizon factor must be at least 1 and the step count positive".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter(
                "worker count must be positive".into(),
            ));
        }
        self.evolution.validate()?;
        self.quadrature.validate()
    }

    /// Warnings about the amplitude list that do not prevent running.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.mus.len() < 4 {
            w.push(format!(
                "{} amplitude(s): rows only, no exponent fit",
                self.mus.len()
            ));
        } else {
            let lo = self.mus.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = self.mus.iter().cloned().fold(0.0, f64::max);
            if hi / lo < 10.0 * (1.0 - 1e-12) {
                w.push(format!(
                    "amplitudes span {:.3} decades, less than one",
                    (hi / lo).log10()
                ));
            }
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub r_star: Option<f64>,
    pub in_regime: bool,
    /// Whether `M_{R*}(0)` on the lattice exceeds `C R*^{n-1/(p-1)}`.
    pub condition_holds: bool,
    pub m0: Option<f64>,
    pub threshold: Option<f64>,
    /// Bound at `R*` from the lattice `M_{R*}(0)`.
    pub t_bound: Option<f64>,
    /// Closed-form corollary bound.
    pub t_closed_form: Option<f64>,
    pub t_num: Option<f64>,
    pub blown_up: bool,
    pub stop: Option<StopReason>,
    pub steps: usize,
    pub dt: Option<f64>,
    pub status: RowStatus,
    #[serde(skip)]
    pub corollary: Option<CorollaryReport>,
    #[serde(skip)]
    pub trajectory: Option<TrajectoryRecord>,
}

impl SweepRow {
    fn failed(mu: f64, err: &Error) -> Self {
        Self {
            mu,
            r_star: None,
            in_regime: false,
            condition_holds: false,
            m0: None,
            threshold: None,
            t_bound: None,
            t_closed_form: None,
            t_num: None,
            blown_up: false,
            stop: None,
            steps: 0,
            dt: None,
            status: RowStatus::Failed(err.to_string()),
            corollary: None,
            trajectory: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    /// `R* < 0.5` (inner) or `R* > 20` (outer): the margin used to select fit rows.
    pub fn fit_eligible(&self, kind: DataKind) -> bool {
        let Some(r) = self.r_star else { return false };
        self.is_ok()
            && match kind {
                DataKind::InnerSingular => r < 0.5,
                DataKind::OuterDecay => r > 20.0,
                DataKind::Integrable => false,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub a_hat: f64,
    pub a_source: DecaySource,
    pub constants: BlowupConstants,
    pub predicted_exponent: f64,
    pub rows: Vec<SweepRow>,
    /// Fit of `T_num` over eligible rows that blew up.
    pub t_num_fit: Option<PowerLawFit>,
    /// Fit of the closed-form bound over eligible rows.
    pub t_bound_fit: Option<PowerLawFit>,
    pub warnings: Vec<String>,
}

/// `A_hat` for the weight `<x>^{-n-1}` from the lemma verifier, with the normalization used.
pub fn sample_decay_constant(
    n: usize,
    cfg: &PVQuadratureConfig,
    plan: &LemmaPlan,
) -> Result<(f64, f64)> {
    let b = normalization_constant(n, cfg)?.value;
    let verdict = verify_lemma(n, n as f64 + 1.0, b, cfg, plan)?;
    if !(verdict.a_hat > 0.0 && verdict.a_hat.is_finite()) {
        return Err(Error::Fit(format!(
            "decay constant estimate {} is not usable",
            verdict.a_hat
        )));
    }
    Ok((verdict.a_hat, b))
}

fn run_row(mu: f64, plan: &SweepPlan, constants: &BlowupConstants) -> Result<SweepRow> {
    let spec = InitialDataSpec {
        kind: plan.kind,
        mu,
        k: plan.k,
    };
    let grid = plan.evolution.grid;
    let u0 = make_initial_data(&spec, grid, &plan.params)?;
    let cor = corollary_radius(&spec, constants, &plan.params, &u0)?;
    let mut cfg = plan.evolution;
    if let Some(tb) = cor.lifespan.t_bound {
        cfg.t_max = plan.horizon_factor * tb;
        cfg.dt = cfg.dt.min(tb / plan.steps_per_bound);
    }
    let weight = WeightProfile::new(plan.params.n as f64 + 1.0, cor.r_star)?;
    let rec = evolve(&u0, &plan.params, &cfg, &weight)?;
    Ok(SweepRow {
        mu,
        r_star: Some(cor.r_star),
        in_regime: cor.in_regime,
        condition_holds: cor.lifespan.condition_holds,
        m0: Some(cor.lifespan.m0),
        threshold: Some(cor.lifespan.threshold),
        t_bound: cor.lifespan.t_bound,
        t_closed_form: Some(cor.t_closed_form),
        t_num: rec.t_num,
        blown_up: rec.blown_up,
        stop: Some(rec.stop),
        steps: rec.steps,
        dt: Some(cfg.dt),
        status: RowStatus::Ok,
        corollary: Some(cor),
        trajectory: plan.keep_trajectories.then_some(rec),
    })
}

/// Runs every amplitude; a failing run becomes a failed row and the sweep continues.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    plan.validate()?;
    let mut warnings = plan.warnings();
    let (a_hat, a_source) = match plan.a_hat {
        Some(a) => (a, DecaySource::Configured),
        None => {
            let lemma_plan = LemmaPlan::default();
            let (a, b) = sample_decay_constant(plan.params.n, &plan.quadrature, &lemma_plan)?;
            (
                a,
                DecaySource::Sampled {
                    plan: lemma_plan,
                    normalization: b,
                },
            )
        }
    };
    let constants = compute_constants(&plan.params, SAFETY_FACTOR * a_hat, &plan.quadrature)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", plan.workers)))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        plan.mus
            .par_iter()
            .map(|&mu| run_row(mu, plan, &constants).unwrap_or_else(|e| SweepRow::failed(mu, &e)))
            .collect()
    });
    for r in &rows {
        if let RowStatus::Failed(msg) = &r.status {
            warnings.push(format!("run at μ = {} failed: {msg}", r.mu));
        }
    }
    let m = match plan.kind {
        DataKind::OuterDecay => plan.k.min(plan.params.n as f64),
        _ => plan.k,
    };
    let predicted_exponent = -1.0 / (1.0 / (plan.params.p - 1.0) - m);
    let eligible: Vec<&SweepRow> = rows.iter().filter(|r| r.fit_eligible(plan.kind)).collect();
    let num_pairs: Vec<(f64, f64)> = eligible
        .iter()
        .filter(|r| r.blown_up)
        .filter_map(|r| r.t_num.map(|t| (r.mu, t)))
        .collect();
    let bound_pairs: Vec<(f64, f64)> = eligible
        .iter()
        .filter_map(|r| r.t_closed_form.map(|t| (r.mu, t)))
        .collect();
    let t_num_fit = fit_or_warn(&num_pairs, "T_num", &mut warnings);
    let t_bound_fit = fit_or_warn(&bound_pairs, "T bound", &mut warnings);
    Ok(SweepResult {
        plan: plan.clone(),
        a_hat,
        a_source,
        constants,
        predicted_exponent,
        rows,
        t_num_fit,
        t_bound_fit,
        warnings,
    })
}

fn fit_or_warn(
    pairs: &[(f64, f64)],
    what: &str,
    warnings: &mut Vec<String>,
) -> Option<PowerLawFit> {
    match fit_power_law(pairs) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("no {what} fit: {e}"));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pairs: Vec<(f64, f64)> = [1.0f64, 2.0, 5.0, 10.0, 30.0]
            .iter()
            .map(|&m| (m, 3.0 * m.powf(-2.0)))
            .collect();
        let f = fit_power_law(&pairs).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-13 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-13);
    }

    #[test]
    fn constant_lifespan_has_zero_exponent() {
        let pairs: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&m| (m, 0.7)).collect();
        assert!(fit_power_law(&pairs).unwrap().exponent.abs() < 1e-14);
    }

    #[test]
    fn refuses_short_or_degenerate_input() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 0.5), (3.0, 0.3), (4.0, 0.2)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -0.5), (3.0, 0.3), (4.0, 0.2)]).is_err());
    }
}
