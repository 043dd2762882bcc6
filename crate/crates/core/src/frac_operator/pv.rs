//! Principal-value quadrature of the half Laplacian for radial profiles.
//!
//! For a radial `f(x) = F(|x|)` at a point with `|x| = r`, pairing `y` with `-y`
//! turns the principal value into an absolutely convergent integral
//!
//! ```text
//!   PV ∫ (f(x) - f(x+y)) / |y|^{n+1} dy = ∫_0^∞ S(ρ) / ρ^2 dρ
//! ```
//!
//! with `S(ρ) = 2F(r) - F(r+ρ) - F(|r-ρ|)` in one dimension and
//! `S(ρ) = 2 ∫_0^{π/2} (2F(r) - F(d+) - F(d-)) dθ`, `d±^2 = r^2 + ρ^2 ± 2rρ cos θ`,
//! in two. `S(ρ) = O(ρ^2)` at the origin so the innermost shell is a proper
//! integral. Beyond the far cutoff `Y` the constant part of `S` is integrated
//! exactly and the rest is bounded through the profile's decay.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::quad::{Adaptive, Estimate, GaussLegendre, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PVQuadratureConfig {
    /// Innermost shell radius, in units of the profile's local length scale.
    pub eps0: f64,
    /// Ratio between consecutive shell radii.
    pub growth: f64,
    /// Largest admissible far cutoff.
    pub y_max: f64,
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Absolute target for the normalization constant.
    pub constant_tol: f64,
    /// Relative target for point values.
    pub rel_tol: f64,
    /// Absolute floor for point values.
    pub abs_tol: f64,
    /// Panel budget of each adaptive integration.
    pub max_panels: usize,
}

impl Default for PVQuadratureConfig {
    fn default() -> Self {
        Self {
            eps0: 1e-3,
            growth: 2.0,
            y_max: 1e14,
            nodes: 10,
            constant_tol: 1e-8,
            rel_tol: 1e-6,
            abs_tol: 1e-24,
            max_panels: 20_000,
        }
    }
}

impl PVQuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return bad(format!("eps0 must lie in (0, 1), got {}", self.eps0));
        }
        if !(self.y_max >= 1.0 && self.y_max.is_finite()) {
            return bad(format!("y_max must be finite and >= 1, got {}", self.y_max));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return bad(format!("shell growth must exceed 1, got {}", self.growth));
        }
        if self.nodes < 2 {
            return bad(format!(
                "need at least 2 nodes per panel, got {}",
                self.nodes
            ));
        }
        if !(self.constant_tol > 0.0 && self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_panels < 4 {
            return bad(format!("panel budget too small: {}", self.max_panels));
        }
        Ok(())
    }

    /// Same schedule with a smaller innermost shell and twice the nodes.
    pub fn refined(&self) -> Self {
        Self {
            eps0: 0.5 * self.eps0,
            nodes: 2 * self.nodes,
            ..*self
        }
    }
}

/// Surface measure of the unit sphere in R^n (2 for n = 1, 2π for n = 2).
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => f64::NAN,
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {n}"
        )))
    }
}

/// `B_n = (∫_{R^n} (1 - cos ξ_1) / |ξ|^{n+1} dξ)^{-1}`, with its error estimate.
///
/// Integrating out the transverse directions reduces the integral to
/// `κ_n · 2∫_0^∞ (1 - cos t)/t^2 dt` where `κ_n = ∫_{R^{n-1}} (1+|η|^2)^{-(n+1)/2} dη`.
pub fn normalization_constant(n: usize, cfg: &PVQuadratureConfig) -> Result<Estimate> {
    check_dim(n)?;
    cfg.validate()?;
    let tol = cfg.constant_tol;
    let oscillatory = one_minus_cos_integral(cfg, 0.05 * tol)?;
    let transverse = if n == 1 {
        Estimate {
            value: 1.0,
            error: 0.0,
            evals: 0,
        }
    } else {
        // η = tan φ maps the line to (-π/2, π/2) and the integrand to cos φ.
        let q = Adaptive::new(cfg.nodes, Tolerance::new(0.05 * tol, 0.0), cfg.max_panels);
        q.integrate(|phi: f64| phi.cos(), &[-0.5 * PI, 0.0, 0.5 * PI])?
    };
    let integral = 2.0 * oscillatory.value * transverse.value;
    let integral_err = 2.0
        * (oscillatory.error * transverse.value.abs() + oscillatory.value.abs() * transverse.error);
    let value = integral.recip();
    let error = integral_err * value * value;
    let est = Estimate {
        value,
        error,
        evals: oscillatory.evals + transverse.evals,
    };
    if !(error <= tol) {
        return Err(Error::NotConverged {
            value,
            residual: error,
            target: tol,
        });
    }
    Ok(est)
}

/// `∫_0^∞ (1 - cos t)/t^2 dt` (= π/2) with an asymptotic tail past the cutoff.
fn one_minus_cos_integral(cfg: &PVQuadratureConfig, tol: f64) -> Result<Estimate> {
    let cutoff = cfg.y_max.min(1024.0);
    let q = Adaptive::new(cfg.nodes, Tolerance::new(tol, 0.0), cfg.max_panels);
    let mut breaks: Vec<f64> = (0..)
        .map(|j| j as f64 * PI)
        .take_while(|&t| t < cutoff)
        .collect();
    breaks.push(cutoff);
    let body = q.integrate(
        |t: f64| {
            if t == 0.0 {
                0.5
            } else {
                let s = (0.5 * t).sin();
                2.0 * s * s / (t * t)
            }
        },
        &breaks,
    )?;
    // ∫_Y^∞ cos t / t^2 dt by repeated integration by parts.
    let y = cutoff;
    let (s, c) = y.sin_cos();
    let cos_tail =
        -s / y.powi(2) + 2.0 * c / y.powi(3) + 6.0 * s / y.powi(4) - 24.0 * c / y.powi(5);
    let tail_err = 120.0 / y.powi(6);
    Ok(Estimate {
        value: body.value + 1.0 / y - cos_tail,
        error: body.error + tail_err,
        evals: body.evals,
    })
}

/// How the inner angular integral (two dimensions) picks its tolerance.
#[derive(Debug, Clone, Copy)]
enum Inner {
    /// Relative target on each angular integral; used for a magnitude estimate.
    Relative(f64),
    /// Absolute budget `share * min(ρ^2, ρ)` so the summed inner error stays below `share * (1 + ln(Y/ε))`.
    Budget(f64),
}

struct Integrand<'a, P: RadialProfile + ?Sized> {
    profile: &'a P,
    n: usize,
    r: f64,
    fr: f64,
    angular: Adaptive,
    inner: Inner,
    failure: Option<Error>,
}

impl<P: RadialProfile + ?Sized> Integrand<'_, P> {
    fn s_over_rho2(&mut self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let s = match self.n {
            1 => {
                let f = self.profile;
                (self.fr - f.value(self.r + rho)) + (self.fr - f.value((self.r - rho).abs()))
            }
            _ => self.angular_sum(rho),
        };
        s / (rho * rho)
    }

    fn angular_sum(&mut self, rho: f64) -> f64 {
        let (r, fr, f) = (self.r, self.fr, self.profile);
        let rr = 4.0 * r * rho;
        let diff = (r - rho) * (r - rho);
        let sum = (r + rho) * (r + rho);
        let integrand = |theta: f64| {
            let h = (0.5 * theta).sin();
            let h2 = rr * h * h;
            let dm = (diff + h2).sqrt();
            let dp = (sum - h2).max(0.0).sqrt();
            (fr - f.value(dp)) + (fr - f.value(dm))
        };
        let mut breaks = vec![0.0, 0.5 * PI];
        if r * rho > 0.0 {
            let mut w = 0.25 * f.scale() / (r * rho).sqrt();
            while w < 0.5 * PI {
                breaks.push(w);
                w *= 4.0;
            }
        }
        // The integrand cannot be resolved below the rounding level of F(r).
        let floor = 64.0 * f64::EPSILON * (fr.abs() + f.value((r - rho).abs()).abs());
        let tol = match self.inner {
            Inner::Relative(rel) => Tolerance::new(floor, rel),
            Inner::Budget(share) => Tolerance::new((share * rho.min(rho * rho)).max(floor), 0.0),
        };
        match self
            .angular
            .with_tolerance(tol)
            .integrate(integrand, &breaks)
        {
            Ok(est) => 2.0 * est.value,
            Err(e) => {
                if self.failure.is_none() {
                    self.failure = Some(e);
                }
                f64::NAN
            }
        }
    }
}

/// `∫_0^∞ S(ρ)/ρ^2 dρ` for the radial profile at radius `r`.
fn radial_pv_integral<P: RadialProfile + ?Sized>(
    profile: &P,
    n: usize,
    r: f64,
    cfg: &PVQuadratureConfig,
    tol: Tolerance,
    inner: Inner,
) -> Result<Estimate> {
    let scale = profile.scale();
    let eps = cfg.eps0 * profile.local_scale(r);
    let fr = profile.value(r);
    let mut g = Integrand {
        profile,
        n,
        r,
        fr,
        angular: Adaptive::new(cfg.nodes, Tolerance::new(0.0, 0.0), cfg.max_panels),
        inner,
        failure: None,
    };

    // Innermost shell: fixed rule, error from comparing one and two panels.
    let rule = GaussLegendre::new(cfg.nodes);
    let mut f = |rho: f64| g.s_over_rho2(rho);
    let one = rule.integrate(&mut f, 0.0, eps);
    let two = rule.integrate(&mut f, 0.0, 0.5 * eps) + rule.integrate(&mut f, 0.5 * eps, eps);
    // S(ρ) is a difference of O(F(r)) terms, so its rounding error is amplified by 1/ρ^2.
    let mut inv_sq = |rho: f64| rho.powi(-2);
    let noise = 2.0
        * sphere_measure(n)
        * f64::EPSILON
        * fr.abs()
        * (rule.integrate(&mut inv_sq, 0.0, 0.5 * eps)
            + rule.integrate(&mut inv_sq, 0.5 * eps, eps));
    let core = Estimate {
        value: two,
        error: (two - one).abs() + noise,
        evals: 3 * cfg.nodes,
    };

    let mut y = (16.0 * (r + scale)).max(eps * cfg.growth).min(cfg.y_max);
    let mut breaks = vec![eps];
    let mut shell = eps * cfg.growth;
    while shell < y {
        breaks.push(shell);
        shell *= cfg.growth;
    }
    breaks.push(y);
    if r > eps {
        breaks.push(r);
        let mut s = 0.25 * scale;
        while s < r {
            breaks.push(r - s);
            breaks.push(r + s);
            s *= 4.0;
        }
    }
    breaks.retain(|&b| b >= eps && b <= y);
    let outer = Adaptive::new(cfg.nodes, tol, cfg.max_panels);
    let body = outer.integrate(&mut f, &breaks);
    drop(f);
    if let Some(e) = g.failure.take() {
        return Err(e);
    }
    let mut total = core + body?;

    let omega = sphere_measure(n);
    let excess = fr - profile.limit();
    loop {
        let target = tol.target(total.value + omega * excess / y);
        let bound = omega * profile.tail_sup(y - r) / y;
        if bound <= 0.25 * target {
            total.value += omega * excess / y;
            total.error += bound;
            return Ok(total);
        }
        if y >= cfg.y_max {
            return Err(Error::NotConverged {
                value: total.value + omega * excess / y,
                residual: total.error + bound,
                target,
            });
        }
        let next = (y * cfg.growth.powi(4)).min(cfg.y_max);
        let mut ext_breaks = vec![y];
        let mut s = y * cfg.growth;
        while s < next {
            ext_breaks.push(s);
            s *= cfg.growth;
        }
        ext_breaks.push(next);
        let seg_tol = Tolerance::new(0.05 * target, 0.0);
        let seg = {
            let mut f = |rho: f64| g.s_over_rho2(rho);
            outer.with_tolerance(seg_tol).integrate(&mut f, &ext_breaks)
        };
        if let Some(e) = g.failure.take() {
            return Err(e);
        }
        total = total + seg?;
        y = next;
    }
}

/// `B · PV∫ (f(x) - f(x+y)) / |y|^{n+1} dy` for `f = profile(|·|)` at the point `x`.
/// The returned error includes the far-field bound and is scaled by `B`.
pub fn frac_laplacian_pv<P: RadialProfile + ?Sized>(
    profile: &P,
    x: &[f64],
    b: f64,
    cfg: &PVQuadratureConfig,
) -> Result<Estimate> {
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    frac_laplacian_pv_radial(profile, x.len(), r, b, cfg)
}

/// Radial form of [`frac_laplacian_pv`]: the value at any point with `|x| = r`.
pub fn frac_laplacian_pv_radial<P: RadialProfile + ?Sized>(
    profile: &P,
    n: usize,
    r: f64,
    b: f64,
    cfg: &PVQuadratureConfig,
) -> Result<Estimate> {
    check_dim(n)?;
    cfg.validate()?;
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "evaluation point must be finite, got r = {r}"
        )));
    }
    let r = r.abs();
    let tol = Tolerance::new(cfg.abs_tol / b, cfg.rel_tol);
    let est = match n {
        1 => radial_pv_integral(profile, 1, r, cfg, tol, Inner::Relative(0.0))?,
        _ => {
            let rough_tol = Tolerance::new(cfg.abs_tol / b, 1e-3);
            let rough = radial_pv_integral(profile, 2, r, cfg, rough_tol, Inner::Relative(1e-8))?;
            let target = tol.target(rough.value);
            let log_span = 1.0 + (cfg.y_max / (cfg.eps0 * profile.scale())).ln().max(0.0);
            let precise = radial_pv_integral(
                profile,
                2,
                r,
                cfg,
                Tolerance::new(target, 0.0),
                Inner::Budget(0.1 * target / log_span),
            )?;
            Estimate {
                value: precise.value,
                error: precise.error + 0.1 * target,
                evals: rough.evals + precise.evals,
            }
        }
    };
    Ok(Estimate {
        value: b * est.value,
        error: b * est.error,
        evals: est.evals,
    })
}

/// Evaluate at many radii in parallel; results keep the input order.
pub fn frac_laplacian_pv_batch<P: RadialProfile + ?Sized>(
    profile: &P,
    n: usize,
    radii: &[f64],
    b: f64,
    cfg: &PVQuadratureConfig,
) -> Vec<Result<Estimate>> {
    radii
        .par_iter()
        .map(|&r| frac_laplacian_pv_radial(profile, n, r, b, cfg))
        .collect()
}
