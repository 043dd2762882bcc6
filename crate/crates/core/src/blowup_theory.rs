//! Explicit blow-up constants, the ODE comparison envelope and lifespan bounds.
//!
//! For `M_R(t) = -Im(α ∫ u(t,x) <x/R>^{-n-1} dx)` the difference
//! `M_R(t) - C R^{n-1/(p-1)}` dominates a solution of `f' = D R^{-n(p-1)} f^p`,
//! which ends at the finite time `T = (p-1)^{-1} D^{-1} R^{n(p-1)} (M_R(0) - C R^{n-1/(p-1)})^{1-p}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{weighted_functional, ProblemParams};
use crate::frac_operator::{sphere_measure, PVQuadratureConfig, RadialProfile, WeightProfile};
use crate::grid::{Field, GridSpec};
use crate::quad::{Adaptive, Tolerance};

/// Factor applied to the sampled supremum `A_hat` to obtain the constant used in `C`.
pub const SAFETY_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupConstants {
    pub n: usize,
    pub p: f64,
    /// Hölder conjugate `p/(p-1)`.
    pub p_conj: f64,
    /// Surface measure of the unit sphere.
    pub omega: f64,
    /// `∫ <x>^{-n-1} dx`.
    pub weight_mass: f64,
    pub weight_mass_error: f64,
    /// Decay constant of `(-Δ)^{1/2} <·>^{-n-1}` actually used.
    pub a: f64,
    pub re_alpha_lambda: f64,
    pub alpha_abs: f64,
    pub c: f64,
    pub d: f64,
}

/// Checks `Re(αλ) > 0`.
pub fn check_pairing(params: &ProblemParams) -> Result<()> {
    let re = params.re_alpha_lambda();
    if re > 0.0 {
        Ok(())
    } else {
        Err(Error::ConditionViolated(format!(
            "Re(αλ) must be positive, got {re:e} (α = {}, λ = {})",
            params.alpha, params.lambda
        )))
    }
}

/// `∫_{R^n} <x>^{-n-1} dx = ω_n ∫_0^{π/2} sin^{n-1}φ dφ` after `r = tan φ`.
pub fn weight_mass(n: usize, cfg: &PVQuadratureConfig) -> Result<(f64, f64)> {
    let omega = sphere_measure(n);
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {n}"
        )));
    }
    let q = Adaptive::new(
        cfg.nodes,
        Tolerance::new(cfg.constant_tol, 0.0),
        cfg.max_panels,
    );
    let est = q.integrate(|phi: f64| phi.sin().powi(n as i32 - 1), &[0.0, 0.5 * PI])?;
    Ok((omega * est.value, omega * est.error))
}

/// Constants `C` and `D` for the given problem and decay constant `a`.
pub fn compute_constants(
    params: &ProblemParams,
    a: f64,
    cfg: &PVQuadratureConfig,
) -> Result<BlowupConstants> {
    check_pairing(params)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay constant must be positive, got {a}"
        )));
    }
    let (n, p) = (params.n, params.p);
    let pc = params.conjugate_exponent();
    let re = params.re_alpha_lambda();
    let aa = params.alpha.norm();
    let (w, w_err) = weight_mass(n, cfg)?;
    let c_pow = 2f64.powf(1.0 + pc / p)
        * p.powf(-pc / p)
        * pc.recip()
        * re.powf(-pc)
        * aa.powf(p + pc)
        * a.powf(pc)
        * w.powf(p);
    let c = c_pow.powf(1.0 / p);
    let d = 0.5 * re * aa.powf(-p) * w.powf(1.0 - p);
    Ok(BlowupConstants {
        n,
        p,
        p_conj: pc,
        omega: sphere_measure(n),
        weight_mass: w,
        weight_mass_error: w_err,
        a,
        re_alpha_lambda: re,
        alpha_abs: aa,
        c,
        d,
    })
}

impl BlowupConstants {
    /// `C R^{n - 1/(p-1)}`.
    pub fn threshold(&self, r: f64) -> f64 {
        self.c * r.powf(self.n as f64 - 1.0 / (self.p - 1.0))
    }
}

/// `-Im(α ∫ u <x/R>^{-n-1} dx)` by the lattice rule; `R` is the weight's scale.
pub fn m_r(u: &Field, alpha: Complex64, weight: &WeightProfile) -> Result<f64> {
    let n = u.grid.dim;
    if (weight.q - (n as f64 + 1.0)).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weight exponent must be n+1 = {}, got {}",
            n + 1,
            weight.q
        )));
    }
    let w: Vec<f64> = (0..u.grid.len())
        .map(|i| weight.value(u.grid.radius(i)))
        .collect();
    Ok(weighted_functional(
        &u.values,
        &w,
        alpha,
        u.grid.cell_volume(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub r: f64,
    pub m0: f64,
    /// `C R^{n-1/(p-1)}`.
    pub threshold: f64,
    /// `M_R(0) - C R^{n-1/(p-1)}`.
    pub gap: f64,
    pub condition_holds: bool,
    /// Finite exactly when the condition holds.
    pub t_bound: Option<f64>,
}

/// The lifespan bound at radius `r`, or no conclusion when `M_R(0) <= C R^{n-1/(p-1)}`.
pub fn lifespan_bound(
    m0: f64,
    constants: &BlowupConstants,
    r: f64,
    params: &ProblemParams,
) -> LifespanReport {
    let p = params.p;
    let threshold = constants.threshold(r);
    let gap = m0 - threshold;
    let condition_holds = gap > 0.0 && gap.is_finite();
    let t_bound = condition_holds.then(|| {
        (p - 1.0).recip()
            * constants.d.recip()
            * r.powf(params.n as f64 * (p - 1.0))
            * gap.powf(1.0 - p)
    });
    LifespanReport {
        r,
        m0,
        threshold,
        gap,
        condition_holds,
        t_bound,
    }
}

/// `{gap^{1-p} - (p-1) D R^{-n(p-1)} t}^{-1/(p-1)}` at each time; infinite from the bound on.
pub fn ode_lower_envelope(
    m0: f64,
    constants: &BlowupConstants,
    r: f64,
    params: &ProblemParams,
    times: &[f64],
) -> Result<Vec<f64>> {
    let report = lifespan_bound(m0, constants, r, params);
    if !report.condition_holds {
        return Err(Error::ConditionViolated(format!(
            "M_R(0) = {m0:e} does not exceed C R^(n-1/(p-1)) = {:e}",
            report.threshold
        )));
    }
    let p = params.p;
    let rate = (p - 1.0) * constants.d * r.powf(-(params.n as f64) * (p - 1.0));
    let start = report.gap.powf(1.0 - p);
    Ok(times
        .iter()
        .map(|&t| {
            let bracket = start - rate * t;
            if bracket <= 0.0 {
                f64::INFINITY
            } else {
                bracket.powf(-1.0 / (p - 1.0))
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// `exp(-|x|^2)`.
    Integrable,
    /// `|x|^{-k}` on the unit ball, zero outside.
    InnerSingular,
    /// Zero on the unit ball, `|x|^{-k}` outside.
    OuterDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub kind: DataKind,
    pub mu: f64,
    /// Singularity or decay exponent (ignored for integrable data).
    #[serde(default)]
    pub k: f64,
}

impl InitialDataSpec {
    pub fn validate(&self, n: usize, p: f64) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be positive, got {}",
                self.mu
            )));
        }
        let nf = n as f64;
        let crit = 1.0 / (p - 1.0);
        match self.kind {
            DataKind::Integrable => Ok(()),
            DataKind::InnerSingular => {
                if self.k < nf / 2.0 && self.k < crit {
                    Ok(())
                } else {
                    Err(Error::ConditionViolated(format!(
                        "inner-singular data need k < min(n/2, 1/(p-1)) = {}, got k = {}",
                        (nf / 2.0).min(crit),
                        self.k
                    )))
                }
            }
            DataKind::OuterDecay => {
                if nf / 2.0 < self.k && self.k < crit {
                    Ok(())
                } else {
                    Err(Error::ConditionViolated(format!(
                        "outer-decay data need n/2 < k < 1/(p-1), i.e. {} < k < {crit}, got k = {}",
                        nf / 2.0,
                        self.k
                    )))
                }
            }
        }
    }

    /// The real profile `-Im(α f)` at radius `r`, with the origin capped at `cap`.
    pub fn profile(&self, r: f64, cap: f64) -> f64 {
        match self.kind {
            DataKind::Integrable => (-r * r).exp(),
            DataKind::InnerSingular => {
                if r <= 1.0 {
                    r.max(cap).powf(-self.k)
                } else {
                    0.0
                }
            }
            DataKind::OuterDecay => {
                if r > 1.0 {
                    r.powf(-self.k)
                } else {
                    0.0
                }
            }
        }
    }
}

/// `μ f` with `f = -i conj(α)/|α|^2 · profile`, so `-Im(α f) = profile` and `Re(α f) = 0`.
pub fn make_initial_data(
    spec: &InitialDataSpec,
    grid: GridSpec,
    params: &ProblemParams,
) -> Result<Field> {
    spec.validate(params.n, params.p)?;
    if grid.dim != params.n {
        return Err(Error::InvalidGrid(format!(
            "grid dimension {} differs from n = {}",
            grid.dim, params.n
        )));
    }
    let a2 = params.alpha.norm_sqr();
    if !(a2 > 0.0) {
        return Err(Error::InvalidParameter(
            "α must be nonzero to fix the phase".into(),
        ));
    }
    let phase = Complex64::new(0.0, -1.0) * params.alpha.conj() / a2 * spec.mu;
    let cap = 0.5 * grid.spacing();
    Ok(Field::from_fn(grid, |x, y| {
        phase * spec.profile(x.hypot(y), cap)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub kind: DataKind,
    pub mu: f64,
    pub k: f64,
    /// `min(n, k)` for outer-decay data, `k` otherwise.
    pub effective_k: f64,
    pub i_const: f64,
    pub r_star: f64,
    /// `R_1 < 1` (inner) or `R_2 > 10` (outer).
    pub in_regime: bool,
    /// Amplitude at which `R*` meets the regime boundary.
    pub regime_boundary_mu: f64,
    /// Condition and Proposition bound evaluated with the lattice `M_{R*}(0)`.
    pub lifespan: LifespanReport,
    /// Closed-form corollary bound `(p-1)^{-1} D^{-1} 2^{p-1} (2C)^{m(p-1)/a} (μ I)^{-1/a}`.
    pub t_closed_form: f64,
    /// Predicted exponent `-1/(1/(p-1) - m)` of the lifespan in `μ`.
    pub predicted_exponent: f64,
}

impl CorollaryReport {
    /// True when the radius is in its regime and the lattice condition holds there.
    pub fn conclusive(&self) -> bool {
        self.in_regime && self.lifespan.condition_holds
    }
}

/// The weight-mass lower-bound constant `I` for the data kind.
pub fn corollary_constant(kind: DataKind, n: usize, k: f64) -> Result<f64> {
    let nf = n as f64;
    let omega = sphere_measure(n);
    match kind {
        DataKind::InnerSingular => Ok(2f64.powf(-nf - 1.0) * omega / (nf - k)),
        DataKind::OuterDecay => {
            if k < nf {
                Ok(2f64.powf(-nf - 2.0) * omega / (nf - k))
            } else {
                // ∫_1^2 r^{n-k-1} dr
                let e = nf - k;
                let integral = if e.abs() < 1e-14 {
                    2f64.ln()
                } else {
                    (2f64.powf(e) - 1.0) / e
                };
                Ok(2f64.powf(-nf - 1.0) * omega * integral)
            }
        }
        DataKind::Integrable => Err(Error::InvalidParameter(
            "integrable data have no corollary radius".into(),
        )),
    }
}

/// Radius `R* = (μ I / (2C))^{-1/(1/(p-1) - m)}` and the lifespan bound there.
pub fn corollary_radius(
    spec: &InitialDataSpec,
    constants: &BlowupConstants,
    params: &ProblemParams,
    data: &Field,
) -> Result<CorollaryReport> {
    spec.validate(params.n, params.p)?;
    let n = params.n;
    let p = params.p;
    let m = match spec.kind {
        DataKind::InnerSingular => spec.k,
        DataKind::OuterDecay => spec.k.min(n as f64),
        DataKind::Integrable => {
            return Err(Error::InvalidParameter(
                "integrable data have no corollary radius".into(),
            ))
        }
    };
    let i_const = corollary_constant(spec.kind, n, spec.k)?;
    let a = 1.0 / (p - 1.0) - m;
    let ratio = spec.mu * i_const / (2.0 * constants.c);
    let r_star = ratio.powf(-1.0 / a);
    let (in_regime, regime_boundary_mu) = match spec.kind {
        DataKind::InnerSingular => (r_star < 1.0, 2.0 * constants.c / i_const),
        _ => (r_star > 10.0, 2.0 * constants.c / i_const * 10f64.powf(-a)),
    };
    let weight = WeightProfile::new(n as f64 + 1.0, r_star)?;
    let m0 = m_r(data, params.alpha, &weight)?;
    let lifespan = lifespan_bound(m0, constants, r_star, params);
    let t_closed_form = (p - 1.0).recip()
        * constants.d.recip()
        * 2f64.powf(p - 1.0)
        * (2.0 * constants.c).powf(m * (p - 1.0) / a)
        * (spec.mu * i_const).powf(-1.0 / a);
    Ok(CorollaryReport {
        kind: spec.kind,
        mu: spec.mu,
        k: spec.k,
        effective_k: m,
        i_const,
        r_star,
        in_regime,
        regime_boundary_mu,
        lifespan,
        t_closed_form,
        predicted_exponent: -1.0 / a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    fn params() -> ProblemParams {
        ProblemParams::with_default_alpha(1, 2.0, i()).unwrap()
    }

    #[test]
    fn weight_mass_oracles() {
        let cfg = PVQuadratureConfig::default();
        let (w1, e1) = weight_mass(1, &cfg).unwrap();
        assert!((w1 - PI).abs() < 1e-12 && e1 <= cfg.constant_tol);
        let (w2, _) = weight_mass(2, &cfg).unwrap();
        assert!((w2 - 2.0 * PI).abs() < 1e-12);
        assert_eq!(sphere_measure(1), 2.0);
    }

    #[test]
    fn pairing_gate() {
        let bad = ProblemParams::new(1, 2.0, i(), Complex64::new(1.0, 0.0)).unwrap();
        let err = compute_constants(&bad, 1.0, &PVQuadratureConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ConditionViolated(_)));
    }

    #[test]
    fn quadratic_case_constants() {
        // p = p' = 2, Re(αλ) = |α| = 1: C = A W and D = 1/(2W).
        let c = compute_constants(&params(), 1.2, &PVQuadratureConfig::default()).unwrap();
        assert!((c.c - 1.2 * PI).abs() < 1e-12);
        assert!((c.d - 0.5 / PI).abs() < 1e-12);
        assert_eq!(c.p_conj, 2.0);
    }

    fn unit_constants() -> BlowupConstants {
        BlowupConstants {
            n: 1,
            p: 2.0,
            p_conj: 2.0,
            omega: 2.0,
            weight_mass: PI,
            weight_mass_error: 0.0,
            a: 1.0,
            re_alpha_lambda: 1.0,
            alpha_abs: 1.0,
            c: 2.0,
            d: 1.0,
        }
    }

    #[test]
    fn lifespan_substitution_and_gap_scaling() {
        let c = unit_constants();
        let rep = lifespan_bound(3.0, &c, 1.0, &params());
        assert_eq!(rep.t_bound, Some(1.0));
        let twice = lifespan_bound(4.0, &c, 1.0, &params());
        assert_eq!(twice.t_bound, Some(0.5));
        let none = lifespan_bound(1.5, &c, 1.0, &params());
        assert!(!none.condition_holds && none.t_bound.is_none());
    }

    #[test]
    fn envelope_properties() {
        let c = unit_constants();
        let times = [0.0, 0.25, 0.5, 0.9, 0.999, 1.0, 2.0];
        let env = ode_lower_envelope(3.0, &c, 1.0, &params(), &times).unwrap();
        assert_eq!(env[0], 1.0);
        assert!(env[..6].windows(2).all(|w| w[1] > w[0]));
        assert!(env[4] > 900.0);
        assert!(env[5].is_infinite() && env[6].is_infinite());
        assert!(ode_lower_envelope(1.0, &c, 1.0, &params(), &times).is_err());
    }

    #[test]
    fn data_invariants_are_enforced() {
        let g = GridSpec::new(1, 40.0, 1024).unwrap();
        let bad = InitialDataSpec {
            kind: DataKind::InnerSingular,
            mu: 1.0,
            k: 0.6,
        };
        assert!(matches!(
            make_initial_data(&bad, g, &params()),
            Err(Error::ConditionViolated(_))
        ));
        let bad = InitialDataSpec {
            kind: DataKind::OuterDecay,
            mu: 1.0,
            k: 1.2,
        };
        assert!(make_initial_data(&bad, g, &params()).is_err());
        let ok = InitialDataSpec {
            kind: DataKind::OuterDecay,
            mu: 1.0,
            k: 0.75,
        };
        let p15 = ProblemParams::with_default_alpha(1, 1.5, i()).unwrap();
        assert!(make_initial_data(&ok, g, &p15).is_ok());
    }

    #[test]
    fn phase_convention_recovers_profile() {
        let g = GridSpec::new(1, 40.0, 1024).unwrap();
        let lam = Complex64::new(0.6, -0.8);
        let params = ProblemParams::new(1, 2.0, lam, lam.conj()).unwrap();
        let spec = InitialDataSpec {
            kind: DataKind::InnerSingular,
            mu: 2.0,
            k: 0.25,
        };
        let u = make_initial_data(&spec, g, &params).unwrap();
        for (idx, z) in u.values.iter().enumerate() {
            let w = params.alpha * z;
            let prof = 2.0 * spec.profile(g.radius(idx), 0.5 * g.spacing());
            assert!(w.re.abs() < 1e-14 && (-w.im - prof).abs() < 1e-13);
        }
    }

    #[test]
    fn functional_of_unit_indicator() {
        // ∫_{-1}^{1} (1+x^2)^{-1} dx = 2 arctan 1, with a smooth edge to keep the lattice sum accurate
        let g = GridSpec::new(1, 8.0, 1 << 14).unwrap();
        let edge = 0.005;
        let ind = |r: f64| 0.5 * (1.0 - ((r - 1.0) / edge).tanh());
        let u = Field::from_fn(g, |x, _| i() * ind(x.abs()));
        let w = WeightProfile::new(2.0, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let v = m_r(&u, one, &w).unwrap();
        assert!((v + 0.5 * PI).abs() < 1e-4, "{v}");
        assert!((m_r(&u, -one, &w).unwrap() - 0.5 * PI).abs() < 1e-4);
        assert_eq!(m_r(&Field::zeros(g), one, &w).unwrap(), 0.0);
        assert!(m_r(&u, one, &WeightProfile::new(3.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn inner_constant_by_hand() {
        let v = corollary_constant(DataKind::InnerSingular, 1, 0.25).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let outer = corollary_constant(DataKind::OuterDecay, 1, 1.5).unwrap();
        assert!((outer - (1.0 - 2f64.powf(-0.5))).abs() < 1e-15);
    }
}
