//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! n = 1
//! p = 2.0
//! lambda = [0.0, 1.0]   # [re, im]
//! alpha = [0.0, -1.0]   # optional, defaults to conj(λ)/|λ|
//!
//! [grid]
//! half_width = 32.0
//! points = 262144
//!
//! [sweep]
//! kind = "inner-singular"
//! k = 0.25
//! mu_min = 20.0
//! mu_max = 200.0
//! count = 8
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blowup_theory::{DataKind, InitialDataSpec};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, ProblemParams};
use crate::frac_operator::PVQuadratureConfig;
use crate::grid::GridSpec;
use crate::lemma_verifier::LemmaPlan;

use super::sweep::SweepPlan;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: Option<ProblemSection>,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub quadrature: PVQuadratureConfig,
    #[serde(default)]
    pub lemma: LemmaSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    pub data: Option<InitialDataSpec>,
    pub sweep: Option<SweepSection>,
    pub apply: Option<ApplySection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: usize,
    pub p: f64,
    pub lambda: [f64; 2],
    pub alpha: Option<[f64; 2]>,
    /// Decay constant `A_hat` of the half Laplacian of `<x>^{-n-1}`; sampled when absent.
    pub a_hat: Option<f64>,
}

impl ProblemSection {
    pub fn params(&self) -> Result<ProblemParams> {
        let lambda = Complex64::new(self.lambda[0], self.lambda[1]);
        match self.alpha {
            Some([re, im]) => ProblemParams::new(self.n, self.p, lambda, Complex64::new(re, im)),
            None => ProblemParams::with_default_alpha(self.n, self.p, lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSection {
    /// Weight exponents tested in one dimension.
    pub q1: Vec<f64>,
    /// Weight exponents tested in two dimensions.
    pub q2: Vec<f64>,
    pub gaussian: bool,
    /// Sampling plan, given as `[lemma.plan]`.
    pub plan: LemmaPlan,
}

impl Default for LemmaSection {
    fn default() -> Self {
        Self {
            q1: vec![0.5, 1.0, 2.0, 3.0],
            q2: vec![1.0, 2.0, 3.0, 4.0],
            gaussian: true,
            plan: LemmaPlan::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub t_max: f64,
    pub threshold_factor: f64,
    pub halving_limit: u32,
    pub nonlinear_cfl: f64,
    pub tail_limit: f64,
    /// Radius of the weight in `M_R`; single runs default to the corollary radius, or 1 for integrable data.
    pub weight_radius: Option<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1.0,
            threshold_factor: 20.0,
            halving_limit: 10,
            nonlinear_cfl: 0.05,
            tail_limit: 1e-3,
            weight_radius: None,
        }
    }
}

impl EvolutionSection {
    pub fn config(&self, grid: GridSpec) -> EvolutionConfig {
        EvolutionConfig {
            grid,
            dt: self.dt,
            t_max: self.t_max,
            threshold_factor: self.threshold_factor,
            halving_limit: self.halving_limit,
            nonlinear_cfl: self.nonlinear_cfl,
            tail_limit: self.tail_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: DataKind,
    pub k: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub count: usize,
    /// Each run stops at `horizon_factor` times its lifespan bound.
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
    /// Each run uses at most `bound / steps_per_bound` as its step.
    #[serde(default = "default_steps_per_bound")]
    pub steps_per_bound: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_horizon_factor() -> f64 {
    1.5
}

fn default_steps_per_bound() -> f64 {
    200.0
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApplyProfile {
    Weight,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplySection {
    pub profile: ApplyProfile,
    /// Weight exponent (weight profile only).
    #[serde(default)]
    pub q: f64,
    /// Dimension; defaults to the problem's.
    pub n: Option<usize>,
    pub radii: Vec<f64>,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn problem(&self) -> Result<ProblemParams> {
        self.problem
            .ok_or_else(|| Error::Config("missing [problem] section".into()))?
            .params()
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let g = self
            .grid
            .ok_or_else(|| Error::Config("missing [grid] section".into()))?;
        let n = self.problem()?.n;
        GridSpec::new(n, g.half_width, g.points)
    }

    pub fn data(&self) -> Result<InitialDataSpec> {
        self.data
            .ok_or_else(|| Error::Config("missing [data] section".into()))
    }

    pub fn sweep(&self) -> Result<SweepSection> {
        self.sweep
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))
    }

    pub fn a_hat(&self) -> Option<f64> {
        self.problem.and_then(|p| p.a_hat)
    }

    /// The sweep described by the `[problem]`, `[grid]`, `[evolution]` and `[sweep]` sections.
    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        let s = self.sweep()?;
        if s.count == 0 {
            return Err(Error::Config("[sweep] count must be positive".into()));
        }
        if !(s.mu_min > 0.0 && s.mu_max >= s.mu_min) {
            return Err(Error::Config(format!(
                "[sweep] needs 0 < mu_min <= mu_max, got {} and {}",
                s.mu_min, s.mu_max
            )));
        }
        Ok(SweepPlan {
            params: self.problem()?,
            kind: s.kind,
            k: s.k,
            mus: SweepPlan::amplitudes(s.mu_min, s.mu_max, s.count),
            evolution: self.evolution.config(self.grid()?),
            horizon_factor: s.horizon_factor,
            steps_per_bound: s.steps_per_bound,
            quadrature: self.quadrature,
            a_hat: self.a_hat(),
            workers: s.workers,
            keep_trajectories: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
n = 1
p = 2.0
lambda = [0.0, 1.0]

[grid]
half_width = 32.0
points = 4096

[quadrature]
rel_tol = 1e-7

[sweep]
kind = "inner-singular"
k = 0.25
mu_min = 20.0
mu_max = 200.0
count = 8
"#;

    #[test]
    fn parses_sections_and_defaults() {
        let c = Config::from_toml_str(SAMPLE).unwrap();
        let params = c.problem().unwrap();
        assert_eq!(params.alpha, Complex64::new(0.0, -1.0));
        assert_eq!(c.grid().unwrap().points, 4096);
        assert_eq!(c.quadrature.rel_tol, 1e-7);
        assert_eq!(c.quadrature.eps0, PVQuadratureConfig::default().eps0);
        let s = c.sweep().unwrap();
        assert_eq!(s.kind, DataKind::InnerSingular);
        assert_eq!(s.horizon_factor, 1.5);
        assert_eq!(c.lemma.q2, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(c.data().is_err());
        let plan = c.sweep_plan().unwrap();
        assert_eq!(plan.mus.len(), 8);
        assert!((plan.mus[7] - 200.0).abs() < 1e-9 && plan.a_hat.is_none());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = SAMPLE.replace("count = 8", "count = \"eight\"");
        let msg = Config::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("count") && msg.contains("line"), "{msg}");
        let unknown = format!("{SAMPLE}\n[grid2]\nx = 1\n");
        assert!(Config::from_toml_str(&unknown).is_err());
    }
}
