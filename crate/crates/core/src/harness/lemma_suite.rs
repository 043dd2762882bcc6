use serde::Serialize;

use crate::error::Result;
use crate::frac_operator::{normalization_constant, PVQuadratureConfig};
use crate::lemma_verifier::{verify_gaussian_remark, verify_lemma, LemmaVerdict};

use super::config::LemmaSection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstantEntry {
    pub n: usize,
    /// `None` for the Gaussian.
    pub q: Option<f64>,
    pub regime: &'static str,
    pub a_hat: f64,
    pub c_hat: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    /// `(n, B_n, certified error)` for each dimension used.
    pub normalization: Vec<(usize, f64, f64)>,
    pub verdicts: Vec<LemmaVerdict>,
    pub table: Vec<DecayConstantEntry>,
    pub warnings: Vec<String>,
}

impl LemmaSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(LemmaVerdict::passed)
    }
}

/// Verifies every configured `(n, q)` pair and, if asked, the Gaussian in each dimension.
pub fn run_lemma_suite(
    section: &LemmaSection,
    cfg: &PVQuadratureConfig,
) -> Result<LemmaSuiteReport> {
    cfg.validate()?;
    let mut report = LemmaSuiteReport {
        normalization: Vec::new(),
        verdicts: Vec::new(),
        table: Vec::new(),
        warnings: Vec::new(),
    };
    if section.q1.is_empty() && section.q2.is_empty() {
        report
            .warnings
            .push("no weight exponents configured; nothing to verify".into());
        return Ok(report);
    }
    for (n, qs) in [(1usize, &section.q1), (2, &section.q2)] {
        if qs.is_empty() {
            continue;
        }
        let b = normalization_constant(n, cfg)?;
        report.normalization.push((n, b.value, b.error));
        for &q in qs.iter() {
            report
                .verdicts
                .push(verify_lemma(n, q, b.value, cfg, &section.plan)?);
        }
        if section.gaussian {
            report
                .verdicts
                .push(verify_gaussian_remark(n, b.value, cfg, &section.plan)?);
        }
    }
    report.table = report
        .verdicts
        .iter()
        .map(|v| DecayConstantEntry {
            n: v.n,
            q: v.q,
            regime: v.regime.label(),
            a_hat: v.a_hat,
            c_hat: v.c_hat,
            passed: v.passed(),
        })
        .collect();
    for v in report.verdicts.iter().filter(|v| !v.passed()) {
        report.warnings.push(format!(
            "n = {}, q = {:?}: {} not confirmed ({})",
            v.n,
            v.q,
            v.regime.label(),
            v.diagnostics.join("; ")
        ));
    }
    Ok(report)
}
