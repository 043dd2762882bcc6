//! Split-step solver for `i u_t + (-Δ)^{1/2} u = λ|u|^p` on a periodic lattice.
//!
//! One step of length `h` is the Strang composition `L(h/2) N(h) L(h/2)`, where
//! `L` is the exact free flow `e^{it|ξ|}` and `N` is an explicit midpoint rule for
//! the pointwise equation `i u' = λ|u|^p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_operator::{RadialProfile, SpectralOperator, WeightProfile};
use crate::grid::{Field, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub lambda: Complex64,
    pub alpha: Complex64,
}

impl ProblemParams {
    pub fn new(n: usize, p: f64, lambda: Complex64, alpha: Complex64) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1 or 2, got {n}"
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponent p must exceed 1, got {p}"
            )));
        }
        if !(lambda.norm() > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficient λ must be nonzero and finite".into(),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(
                "pairing coefficient α must be finite".into(),
            ));
        }
        Ok(Self {
            n,
            p,
            lambda,
            alpha,
        })
    }

    /// Uses `α = conj(λ)/|λ|`, which makes `Re(αλ) = |λ| > 0`.
    pub fn with_default_alpha(n: usize, p: f64, lambda: Complex64) -> Result<Self> {
        Self::new(n, p, lambda, default_alpha(lambda))
    }

    /// The free half-wave flow (`λ = 0`). Only meant for testing the linear part.
    pub fn free_flow(n: usize, p: f64, alpha: Complex64) -> Self {
        Self {
            n,
            p,
            lambda: Complex64::new(0.0, 0.0),
            alpha,
        }
    }

    pub fn re_alpha_lambda(&self) -> f64 {
        (self.alpha * self.lambda).re
    }

    /// Hölder conjugate `p/(p-1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

pub fn default_alpha(lambda: Complex64) -> Complex64 {
    lambda.conj() / lambda.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub grid: GridSpec,
    /// Largest step.
    pub dt: f64,
    pub t_max: f64,
    /// Blow-up is flagged once the sup norm reaches `threshold_factor * |u_0|_∞`; must exceed 10.
    pub threshold_factor: f64,
    /// Steps may shrink to `dt / 2^halving_limit`.
    pub halving_limit: u32,
    /// Steps satisfy `h |λ| |u|_∞^{p-1} <= nonlinear_cfl`.
    pub nonlinear_cfl: f64,
    /// Largest admissible share of spectral energy above half the Nyquist frequency.
    pub tail_limit: f64,
}

impl EvolutionConfig {
    pub fn new(grid: GridSpec, dt: f64, t_max: f64) -> Self {
        Self {
            grid,
            dt,
            t_max,
            threshold_factor: 20.0,
            halving_limit: 10,
            nonlinear_cfl: 0.05,
            tail_limit: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.threshold_factor > 10.0) {
            return Err(Error::InvalidParameter(format!(
                "blow-up threshold must exceed 10 |u0|_inf, got factor {}",
                self.threshold_factor
            )));
        }
        if !(self.nonlinear_cfl > 0.0) {
            return Err(Error::InvalidParameter(
                "nonlinear step bound must be positive".into(),
            ));
        }
        if !(self.tail_limit > 0.0) {
            return Err(Error::InvalidParameter(
                "spectral tail limit must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn min_step(&self) -> f64 {
        self.dt / 2f64.powi(self.halving_limit as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    Threshold,
    HalvingExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub m_r: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub l2_norm: Vec<f64>,
    pub blown_up: bool,
    /// Numerical blow-up time; the last accepted time when flagged.
    pub t_num: Option<f64>,
    pub stop: StopReason,
    /// Absolute sup-norm threshold used.
    pub threshold: f64,
    pub weight_radius: f64,
    pub steps: usize,
    pub spectral_tail: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, m: f64, u: &Field) {
        self.times.push(t);
        self.m_r.push(m);
        self.sup_norm.push(u.sup_norm());
        self.l2_norm.push(u.l2_norm());
    }
}

/// `e^{it|ξ|} f`.
pub fn linear_propagator(f: &Field, t: f64) -> Field {
    SpectralOperator::new(f.grid).propagate(f, t)
}

#[inline]
fn abs_pow(z: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        z.norm_sqr()
    } else {
        let a = z.norm();
        if a == 0.0 {
            0.0
        } else {
            (p * a.ln()).exp()
        }
    }
}

fn nonlinear_in_place(values: &mut [Complex64], h: f64, p: f64, lambda: Complex64) {
    let k = Complex64::new(0.0, -1.0) * lambda;
    for u in values.iter_mut() {
        let mid = *u + k * (0.5 * h) * abs_pow(*u, p);
        *u += k * h * abs_pow(mid, p);
    }
}

/// Midpoint step for `i u' = λ|u|^p` over `dt`, pointwise.
pub fn nonlinear_step(f: &Field, dt: f64, params: &ProblemParams) -> Field {
    let mut out = f.clone();
    nonlinear_in_place(&mut out.values, dt, params.p, params.lambda);
    out
}

/// Lattice value of `-Im(α ∫ u w dx)` for a sampled weight `w`.
pub fn weighted_functional(
    values: &[Complex64],
    weight: &[f64],
    alpha: Complex64,
    cell: f64,
) -> f64 {
    let s: Complex64 = values.iter().zip(weight).map(|(u, w)| u * w).sum();
    -(alpha * s).im * cell
}

/// Strang stepper bound to one grid and problem.
pub struct Evolver {
    params: ProblemParams,
    config: EvolutionConfig,
    op: SpectralOperator,
    weight: Vec<f64>,
    weight_radius: f64,
    half_steps: Vec<(f64, Vec<Complex64>)>,
}

impl Evolver {
    pub fn new(
        params: ProblemParams,
        config: EvolutionConfig,
        weight: WeightProfile,
    ) -> Result<Self> {
        config.validate()?;
        if params.n != config.grid.dim {
            return Err(Error::InvalidParameter(format!(
                "problem dimension {} does not match grid dimension {}",
                params.n, config.grid.dim
            )));
        }
        if (weight.q - (params.n as f64 + 1.0)).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must be n+1 = {}, got {}",
                params.n + 1,
                weight.q
            )));
        }
        let grid = config.grid;
        let w = (0..grid.len())
            .map(|i| weight.value(grid.radius(i)))
            .collect();
        Ok(Self {
            params,
            config,
            op: SpectralOperator::new(grid),
            weight: w,
            weight_radius: weight.scale,
            half_steps: Vec::new(),
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn m_r(&self, u: &Field) -> f64 {
        weighted_functional(
            &u.values,
            &self.weight,
            self.params.alpha,
            u.grid.cell_volume(),
        )
    }

    fn half_step_table(&mut self, h: f64) -> usize {
        if let Some(i) = self.half_steps.iter().position(|(k, _)| *k == h) {
            return i;
        }
        let table = self
            .op
            .frequency_norms()
            .iter()
            .map(|&k| Complex64::cis(0.5 * h * k))
            .collect();
        if self.half_steps.len() >= 64 {
            self.half_steps.remove(0);
        }
        self.half_steps.push((h, table));
        self.half_steps.len() - 1
    }

    /// One Strang step of length `h`, in place.
    pub fn step(&mut self, values: &mut [Complex64], h: f64) {
        let i = self.half_step_table(h);
        let table = &self.half_steps[i].1;
        self.op.apply_table(values, table);
        nonlinear_in_place(values, h, self.params.p, self.params.lambda);
        self.op.apply_table(values, table);
    }

    fn check_field(&self, u0: &Field) -> Result<f64> {
        if u0.grid != self.config.grid {
            return Err(Error::InvalidGrid(
                "initial data live on a different grid".into(),
            ));
        }
        if !u0.is_finite() {
            return Err(Error::InvalidParameter(
                "initial data contain non-finite values".into(),
            ));
        }
        let tail = self.op.high_frequency_fraction(u0);
        if tail > self.config.tail_limit {
            return Err(Error::Unresolved {
                tail_fraction: tail,
                limit: self.config.tail_limit,
            });
        }
        Ok(tail)
    }

    /// Advance with uniform steps `dt` (the last one clipped) from `t_from` to `t_to`.
    pub fn advance_uniform(&mut self, u: &mut Field, t_from: f64, t_to: f64, dt: f64) {
        let mut t = t_from;
        while t < t_to {
            let h = dt.min(t_to - t);
            let h = if t_to - (t + h) < 1e-12 * dt {
                t_to - t
            } else {
                h
            };
            self.step(&mut u.values, h);
            t += h;
        }
    }

    /// Evolve to the horizon or to numerical blow-up. Returns the record and the last accepted state.
    pub fn run(&mut self, u0: &Field) -> Result<(TrajectoryRecord, Field)> {
        let tail = self.check_field(u0)?;
        let cfg = self.config;
        let sup0 = u0.sup_norm();
        let threshold = cfg.threshold_factor * sup0;
        let lam = self.params.lambda.norm();
        let p = self.params.p;
        let mut u = u0.clone();
        let mut rec = TrajectoryRecord {
            times: Vec::new(),
            m_r: Vec::new(),
            sup_norm: Vec::new(),
            l2_norm: Vec::new(),
            blown_up: false,
            t_num: None,
            stop: StopReason::Horizon,
            threshold,
            weight_radius: self.weight_radius,
            steps: 0,
            spectral_tail: tail,
        };
        rec.push(0.0, self.m_r(&u), &u);
        let mut t = 0.0;
        let mut sup = sup0;
        let mut scratch = u.values.clone();
        while t < cfg.t_max {
            let mut halvings = 0u32;
            let mut h = cfg.dt;
            if lam > 0.0 {
                while h * lam * sup.powf(p - 1.0) > cfg.nonlinear_cfl
                    && halvings <= cfg.halving_limit
                {
                    h *= 0.5;
                    halvings += 1;
                }
            }
            let accepted = loop {
                if halvings > cfg.halving_limit {
                    break None;
                }
                let step = h.min(cfg.t_max - t);
                scratch.copy_from_slice(&u.values);
                self.step(&mut scratch, step);
                if scratch.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    break Some(step);
                }
                h *= 0.5;
                halvings += 1;
            };
            let Some(step) = accepted else {
                rec.blown_up = true;
                rec.t_num = Some(t);
                rec.stop = StopReason::HalvingExhausted;
                break;
            };
            std::mem::swap(&mut u.values, &mut scratch);
            t = if cfg.t_max - (t + step) < 1e-12 * cfg.dt {
                cfg.t_max
            } else {
                t + step
            };
            rec.steps += 1;
            rec.push(t, self.m_r(&u), &u);
            sup = *rec.sup_norm.last().unwrap();
            if sup >= threshold {
                rec.blown_up = true;
                rec.t_num = Some(t);
                rec.stop = StopReason::Threshold;
                break;
            }
        }
        Ok((rec, u))
    }
}

/// Evolve `u0` and record `M_R(t)`, the sup norm and the L² norm at every accepted step.
pub fn evolve(
    u0: &Field,
    params: &ProblemParams,
    config: &EvolutionConfig,
    weight: &WeightProfile,
) -> Result<TrajectoryRecord> {
    Evolver::new(*params, *config, *weight)?
        .run(u0)
        .map(|(rec, _)| rec)
}

/// Largest relative L² discrepancy, over the checkpoint times `t`, between the
/// run from `ρ^{1/(p-1)} u_0(ρx)` on the dilated lattice and `ρ^{1/(p-1)} u(ρt, ρx)`.
/// Both runs use the step `config.dt`.
pub fn scaling_check(
    u0: &Field,
    params: &ProblemParams,
    config: &EvolutionConfig,
    rho: f64,
    checkpoints: &[f64],
) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {rho}"
        )));
    }
    if checkpoints.iter().any(|t| !(*t >= 0.0)) || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "checkpoints must be non-negative and increasing".into(),
        ));
    }
    let weight = WeightProfile::new(params.n as f64 + 1.0, 1.0)?;
    let amp = rho.powf(1.0 / (params.p - 1.0));
    let grid2 = config.grid.dilated(rho)?;
    let cfg2 = EvolutionConfig {
        grid: grid2,
        ..*config
    };
    let mut base = Evolver::new(*params, *config, weight)?;
    let mut scaled = Evolver::new(*params, cfg2, weight)?;
    let mut u = u0.clone();
    let mut v = Field::from_values(grid2, u0.values.iter().map(|z| z * amp).collect())?;
    base.check_field(&u)?;
    scaled.check_field(&v)?;
    let (mut tu, mut tv) = (0.0, 0.0);
    let mut worst = 0.0f64;
    for &t in checkpoints {
        base.advance_uniform(&mut u, tu, rho * t, config.dt);
        scaled.advance_uniform(&mut v, tv, t, config.dt);
        tu = rho * t;
        tv = t;
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::Unresolved {
                tail_fraction: f64::INFINITY,
                limit: config.tail_limit,
            });
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in u.values.iter().zip(&v.values) {
            num += (b - a * amp).norm_sqr();
            den += b.norm_sqr();
        }
        if den > 0.0 {
            worst = worst.max((num / den).sqrt());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ProblemParams {
        ProblemParams::new(1, 2.0, Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)).unwrap()
    }

    #[test]
    fn parameter_validation() {
        let i = Complex64::new(0.0, 1.0);
        assert!(ProblemParams::new(1, 1.0, i, i).is_err());
        assert!(ProblemParams::new(3, 2.0, i, i).is_err());
        assert!(ProblemParams::new(1, 2.0, Complex64::new(0.0, 0.0), i).is_err());
        let p = ProblemParams::with_default_alpha(1, 2.0, Complex64::new(3.0, 4.0)).unwrap();
        assert!((p.re_alpha_lambda() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn zero_step_is_identity() {
        let g = GridSpec::new(1, 10.0, 64).unwrap();
        let f = Field::from_fn(g, |x, _| Complex64::new((-x * x).exp(), 0.3 * x));
        assert_eq!(linear_propagator(&f, 0.0), f);
    }

    #[test]
    fn zero_field_is_fixed_by_the_nonlinearity() {
        let g = GridSpec::new(1, 10.0, 16).unwrap();
        let z = Field::zeros(g);
        assert_eq!(nonlinear_step(&z, 0.1, &params()), z);
    }

    #[test]
    fn midpoint_rule_matches_scalar_ode() {
        // i u' = i |u|^2 with u real: u' = u^2, u(t) = c / (1 - c t).
        let g = GridSpec::new(1, 1.0, 8).unwrap();
        let c = 0.8;
        let mut errs = Vec::new();
        for k in 0..4 {
            let h = 0.05 / 2f64.powi(k);
            let f = Field::from_real(g, |_, _| c);
            let out = nonlinear_step(&f, h, &params());
            let exact = c / (1.0 - c * h);
            errs.push((out.values[3].re - exact).abs());
            assert!(out.values[3].im.abs() < 1e-15);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((7.0..9.5).contains(&ratio), "local error ratio {ratio}");
        }
    }

    #[test]
    fn threshold_factor_must_exceed_ten() {
        let g = GridSpec::new(1, 10.0, 64).unwrap();
        let cfg = EvolutionConfig {
            threshold_factor: 10.0,
            ..EvolutionConfig::new(g, 0.01, 1.0)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rough_data_are_refused() {
        let g = GridSpec::new(1, 10.0, 64).unwrap();
        let u0 = Field::from_fn(g, |x, _| {
            Complex64::new(if x.abs() < 3.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let w = WeightProfile::new(2.0, 1.0).unwrap();
        let err = evolve(&u0, &params(), &EvolutionConfig::new(g, 0.01, 0.1), &w).unwrap_err();
        assert!(matches!(err, Error::Unresolved { .. }));
    }

    #[test]
    fn unit_scale_has_no_discrepancy() {
        let g = GridSpec::new(1, 20.0, 256).unwrap();
        let u0 = Field::from_real(g, |x, _| 0.5 * (-x * x).exp());
        let d = scaling_check(
            &u0,
            &params(),
            &EvolutionConfig::new(g, 0.01, 1.0),
            1.0,
            &[0.1, 0.2],
        )
        .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn spatially_constant_data_follow_the_ode() {
        let g = GridSpec::new(1, 5.0, 32).unwrap();
        let c = 1.0;
        let u0 = Field::from_real(g, |_, _| c);
        let cfg = EvolutionConfig::new(g, 1e-3, 2.0);
        let rec = evolve(&u0, &params(), &cfg, &WeightProfile::new(2.0, 1.0).unwrap()).unwrap();
        assert!(rec.blown_up);
        assert_eq!(rec.stop, StopReason::Threshold);
        let t = rec.t_num.unwrap();
        // sup = c/(1 - ct) reaches 20c at t = 0.95/c.
        assert!((t - 0.95).abs() < 5e-3, "t_num = {t}");
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
    }
}
