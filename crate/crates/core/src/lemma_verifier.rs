//! Decay of the half Laplacian of algebraic weights `<x>^{-q}`.
//!
//! The bound is `A <x>^{-q-1}` for `q < n`, `A <x>^{-n-1} (1 + log(1+|x|))` for
//! `q = n` and `A <x>^{-n-1}` for `q > n`. For `q >= n` the value is eventually
//! negative, and the same is true for the Gaussian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_line_weighted, golden_min, log_space};
use crate::frac_operator::{
    frac_laplacian_pv_batch, Gaussian, PVQuadratureConfig, RadialProfile, WeightProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "q<n")]
    Subcritical,
    #[serde(rename = "q=n")]
    Critical,
    #[serde(rename = "q>n")]
    Supercritical,
    #[serde(rename = "gaussian")]
    Gaussian,
}

impl Regime {
    pub fn select(n: usize, q: f64) -> Self {
        let nf = n as f64;
        if (q - nf).abs() <= 1e-12 * nf {
            Regime::Critical
        } else if q < nf {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Subcritical => "q<n",
            Regime::Critical => "q=n",
            Regime::Supercritical => "q>n",
            Regime::Gaussian => "gaussian",
        }
    }

    /// Predicted power of `<r>` in the decay bound.
    pub fn predicted_exponent(&self, n: usize, q: f64) -> f64 {
        match self {
            Regime::Subcritical => -q - 1.0,
            _ => -(n as f64) - 1.0,
        }
    }

    /// The shape of the decay bound at radius `r`, without its constant.
    pub fn bound(&self, n: usize, q: f64, r: f64) -> f64 {
        let bracket = (1.0 + r * r).sqrt();
        let base = bracket.powf(self.predicted_exponent(n, q));
        match self {
            Regime::Critical => base * (1.0 + r.ln_1p()),
            _ => base,
        }
    }

    pub fn expects_negative_tail(&self) -> bool {
        !matches!(self, Regime::Subcritical)
    }
}

/// Allowed deviation of a fitted exponent from its prediction.
pub fn exponent_tolerance(n: usize) -> f64 {
    if n == 1 {
        0.05
    } else {
        0.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub g: f64,
    pub error: f64,
}

/// Certified values of `(-Δ)^{1/2} <·>^{-q}` at the given radii.
pub fn sample_frac_weight(
    n: usize,
    q: f64,
    radii: &[f64],
    b: f64,
    cfg: &PVQuadratureConfig,
) -> Result<Vec<Sample>> {
    let weight = WeightProfile::unit(q)?;
    sample_profile(&weight, n, radii, b, cfg)
}

pub fn sample_profile<P: RadialProfile>(
    profile: &P,
    n: usize,
    radii: &[f64],
    b: f64,
    cfg: &PVQuadratureConfig,
) -> Result<Vec<Sample>> {
    if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidParameter(
            "radii must be finite and non-negative".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be increasing".into()));
    }
    frac_laplacian_pv_batch(profile, n, radii, b, cfg)
        .into_iter()
        .zip(radii)
        .map(|(est, &r)| {
            est.map(|e| Sample {
                r,
                g: e.value,
                error: e.error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `log|g| ≈ s log<r> + c`.
    Plain,
    /// `log|g| ≈ s log<r> + log(a + b log(1+r))`.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitResult {
    pub model: FitModel,
    pub exponent: f64,
    /// Coefficient `b` of the logarithmic model (0 for the plain model).
    pub log_coefficient: f64,
    /// Constant `a` of the logarithmic model, or `exp(c)` for the plain model.
    pub amplitude: f64,
    /// `sup |g| / <r>^{hypothesis}` over the samples (times `1/(1+log(1+r))` for the logarithmic model).
    pub a_hat: f64,
    /// RMS residual in `log|g|`.
    pub residual: f64,
    pub r_min: f64,
    pub r_max: f64,
}

fn usable(samples: &[Sample]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let kept: Vec<&Sample> = samples
        .iter()
        .filter(|s| s.r > 0.0 && s.g.is_finite() && s.g.abs() > 2.0 * s.error && s.g != 0.0)
        .collect();
    if kept.is_empty() {
        return Err(Error::Fit("all samples are below their noise floor".into()));
    }
    if kept.len() < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 resolved samples, got {}",
            kept.len()
        )));
    }
    let r: Vec<f64> = kept.iter().map(|s| s.r).collect();
    let (lo, hi) = (r[0], r[r.len() - 1]);
    if hi / lo < 99.999 {
        return Err(Error::Fit(format!(
            "samples span less than two decades: [{lo}, {hi}]"
        )));
    }
    let x = r.iter().map(|r| (1.0 + r * r).sqrt().ln()).collect();
    let y = kept.iter().map(|s| s.g.abs().ln()).collect();
    Ok((r, x, y))
}

/// Fit the decay of `|g|`. `hypothesis` is the exponent used for `a_hat`.
pub fn fit_decay(samples: &[Sample], model: FitModel, hypothesis: f64) -> Result<DecayFitResult> {
    let (r, x, y) = usable(samples)?;
    let (r_min, r_max) = (r[0], r[r.len() - 1]);
    let plain = fit_line(&x, &y)?;
    let logs: Vec<f64> = r.iter().map(|r| r.ln_1p()).collect();
    let (exponent, amplitude, log_coefficient, residual) = match model {
        FitModel::Plain => (plain.slope, plain.intercept.exp(), 0.0, plain.rms),
        FitModel::Logarithmic => {
            let profile_at = |s: f64| -> (f64, f64, f64) {
                // |g| <r>^{-s} ≈ a + b log(1+r), solved with relative weights.
                let z: Vec<f64> = x
                    .iter()
                    .zip(&y)
                    .map(|(xi, yi)| (yi - s * xi).exp())
                    .collect();
                let w: Vec<f64> = z.iter().map(|v| v.powi(-2)).collect();
                let Ok((a, b)) = fit_line_weighted(&logs, &z, &w) else {
                    return (f64::INFINITY, 0.0, 0.0);
                };
                let mut ss = 0.0;
                for ((xi, yi), li) in x.iter().zip(&y).zip(&logs) {
                    let m = a + b * li;
                    if m <= 0.0 {
                        return (f64::INFINITY, a, b);
                    }
                    ss += (yi - s * xi - m.ln()).powi(2);
                }
                ((ss / x.len() as f64).sqrt(), a, b)
            };
            let s = golden_min(
                |s| profile_at(s).0,
                plain.slope - 1.5,
                plain.slope + 1.0,
                1e-10,
            );
            let (rms, a, b) = profile_at(s);
            if !rms.is_finite() {
                return Err(Error::Fit("logarithmic model has no admissible fit".into()));
            }
            (s, a, b, rms)
        }
    };
    let a_hat = samples
        .iter()
        .filter(|s| s.g.is_finite())
        .map(|s| {
            let bracket = (1.0 + s.r * s.r).sqrt().powf(hypothesis);
            let shape = match model {
                FitModel::Plain => bracket,
                FitModel::Logarithmic => bracket * (1.0 + s.r.ln_1p()),
            };
            s.g.abs() / shape
        })
        .fold(0.0, f64::max);
    Ok(DecayFitResult {
        model,
        exponent,
        log_coefficient,
        amplitude,
        a_hat,
        residual,
        r_min,
        r_max,
    })
}

/// Sampling plan for a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaPlan {
    /// Fit window.
    pub r_min: f64,
    pub r_max: f64,
    pub fit_points: usize,
    /// Points per decade of the global sweep `[sweep_start, r_max]` used for `A_hat` and the sign.
    pub points_per_decade: usize,
    pub sweep_start: f64,
}

impl Default for LemmaPlan {
    fn default() -> Self {
        Self {
            r_min: 1e2,
            r_max: 1e4,
            fit_points: 17,
            points_per_decade: 12,
            sweep_start: 1e-2,
        }
    }
}

impl LemmaPlan {
    pub fn fit_radii(&self) -> Vec<f64> {
        log_space(self.r_min, self.r_max, self.fit_points)
    }

    /// 0 followed by a log-spaced sweep up to `r_max`.
    pub fn sweep_radii(&self) -> Vec<f64> {
        let decades = (self.r_max / self.sweep_start).log10();
        let count = (decades * self.points_per_decade as f64).round() as usize + 1;
        let mut v = vec![0.0];
        v.extend(log_space(self.sweep_start, self.r_max, count));
        v
    }

    pub fn refined(&self) -> Self {
        Self {
            points_per_decade: 2 * self.points_per_decade,
            fit_points: 2 * self.fit_points - 1,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub n: usize,
    /// Weight exponent; `None` for the Gaussian.
    pub q: Option<f64>,
    pub regime: Regime,
    pub predicted_exponent: f64,
    pub tolerance: f64,
    pub fit: DecayFitResult,
    /// Plain power fit over the same window (equals `fit` outside the critical case).
    pub plain_fit: DecayFitResult,
    /// `plain_fit.residual / fit.residual`.
    pub residual_ratio: f64,
    pub exponent_matched: bool,
    /// Critical case only: `b > 0` and `residual_ratio > 3`.
    pub log_model_preferred: Option<bool>,
    pub regime_matched: bool,
    /// `sup |g| / bound` over every sample.
    pub a_hat: f64,
    /// Smallest sampled radius beyond which every sample is certified negative.
    pub r_neg: Option<f64>,
    /// For regimes with a negative tail: `r_neg` exists and lies below the fit window.
    pub negativity: Option<bool>,
    /// `inf (-g) <r>^{n+1}` over the samples beyond `r_neg` (Gaussian only).
    pub c_hat: Option<f64>,
    pub samples: Vec<Sample>,
    pub diagnostics: Vec<String>,
}

impl LemmaVerdict {
    pub fn passed(&self) -> bool {
        self.regime_matched && self.negativity.unwrap_or(true)
    }
}

fn merged(a: Vec<Sample>, b: Vec<Sample>) -> Vec<Sample> {
    let mut all: Vec<Sample> = a.into_iter().chain(b).collect();
    all.sort_by(|x, y| x.r.total_cmp(&y.r));
    all.dedup_by(|x, y| (x.r - y.r).abs() <= 1e-12 * y.r.max(1.0));
    all
}

fn negative_from(samples: &[Sample]) -> Option<f64> {
    let last_bad = samples.iter().rposition(|s| !(s.g + s.error < 0.0));
    match last_bad {
        None => samples.first().map(|s| s.r),
        Some(i) => samples.get(i + 1).map(|s| s.r),
    }
}

/// Check the decay regime selected by comparing `q` with `n`.
pub fn verify_lemma(
    n: usize,
    q: f64,
    b: f64,
    cfg: &PVQuadratureConfig,
    plan: &LemmaPlan,
) -> Result<LemmaVerdict> {
    if !(n == 1 || n == 2) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {n}"
        )));
    }
    let weight = WeightProfile::unit(q)?;
    let regime = Regime::select(n, q);
    verify_profile(&weight, n, Some(q), regime, b, cfg, plan)
}

/// Negativity and `-(n+1)` decay for `exp(-|x|^2)`.
pub fn verify_gaussian_remark(
    n: usize,
    b: f64,
    cfg: &PVQuadratureConfig,
    plan: &LemmaPlan,
) -> Result<LemmaVerdict> {
    if !(n == 1 || n == 2) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {n}"
        )));
    }
    verify_profile(&Gaussian::unit(), n, None, Regime::Gaussian, b, cfg, plan)
}

fn verify_profile<P: RadialProfile>(
    profile: &P,
    n: usize,
    q: Option<f64>,
    regime: Regime,
    b: f64,
    cfg: &PVQuadratureConfig,
    plan: &LemmaPlan,
) -> Result<LemmaVerdict> {
    let qv = q.unwrap_or(f64::INFINITY);
    let predicted = regime.predicted_exponent(n, qv);
    let tolerance = exponent_tolerance(n);
    let window = sample_profile(profile, n, &plan.fit_radii(), b, cfg)?;
    let sweep = sample_profile(profile, n, &plan.sweep_radii(), b, cfg)?;
    let model = if regime == Regime::Critical {
        FitModel::Logarithmic
    } else {
        FitModel::Plain
    };
    let fit = fit_decay(&window, model, predicted)?;
    let plain_fit = fit_decay(&window, FitModel::Plain, predicted)?;
    let residual_ratio = plain_fit.residual / fit.residual.max(f64::MIN_POSITIVE);
    let mut diagnostics = Vec::new();

    let exponent_matched = (fit.exponent - predicted).abs() <= tolerance;
    if !exponent_matched {
        diagnostics.push(format!(
            "fitted exponent {:.4} differs from {:.4} by more than {tolerance}",
            fit.exponent, predicted
        ));
    }
    let log_model_preferred = (regime == Regime::Critical).then(|| {
        let ok = fit.log_coefficient > 0.0 && residual_ratio > 3.0;
        if !ok {
            diagnostics.push(format!(
                "log model: b = {:.4e}, plain/log residual ratio = {residual_ratio:.3}",
                fit.log_coefficient
            ));
        }
        ok
    });
    let regime_matched = exponent_matched && log_model_preferred.unwrap_or(true);

    let samples = merged(sweep, window);
    let a_hat = samples
        .iter()
        .map(|s| match regime {
            Regime::Gaussian => s.g.abs() * (1.0 + s.r * s.r).sqrt().powi(n as i32 + 1),
            _ => s.g.abs() / regime.bound(n, qv, s.r),
        })
        .fold(0.0, f64::max);
    let r_neg = negative_from(&samples);
    let negativity = regime.expects_negative_tail().then(|| {
        let ok = r_neg.is_some_and(|r| r <= plan.r_min);
        if !ok {
            diagnostics.push(format!(
                "sign change not observed below {}: r_neg = {r_neg:?}",
                plan.r_min
            ));
        }
        ok
    });
    let c_hat = match (regime, r_neg) {
        (Regime::Gaussian, Some(rn)) => Some(
            samples
                .iter()
                .filter(|s| s.r >= rn)
                .map(|s| -s.g * (1.0 + s.r * s.r).sqrt().powi(n as i32 + 1))
                .fold(f64::INFINITY, f64::min),
        ),
        _ => None,
    };
    Ok(LemmaVerdict {
        n,
        q,
        regime,
        predicted_exponent: predicted,
        tolerance,
        fit,
        plain_fit,
        residual_ratio,
        exponent_matched,
        log_model_preferred,
        regime_matched,
        a_hat,
        r_neg,
        negativity,
        c_hat,
        samples,
        diagnostics,
    })
}
