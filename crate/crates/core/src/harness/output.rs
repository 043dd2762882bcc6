//! CSV and JSON writers. Every file is written to a temporary name first and
//! renamed into place, so a failed command leaves no half-written output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::evolution::TrajectoryRecord;
use crate::lemma_verifier::LemmaVerdict;

use super::sweep::{RowStatus, SweepResult};

pub const SCHEMA: &str = "fracblow/1";

/// JSON manifest wrapper carrying the schema tag and the files written alongside.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub version: &'static str,
    pub files: Vec<String>,
    pub warnings: &'a [String],
    pub report: &'a T,
}

impl<'a, T: Serialize> Manifest<'a, T> {
    pub fn new(
        command: &'a str,
        files: Vec<String>,
        warnings: &'a [String],
        report: &'a T,
    ) -> Self {
        Self {
            schema: SCHEMA,
            command,
            version: env!("CARGO_PKG_VERSION"),
            files,
            warnings,
            report,
        }
    }
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trajectory_csv(rec: &TrajectoryRecord) -> String {
    let mut s = String::from("t,M_R,sup_norm,l2_norm\n");
    for i in 0..rec.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            rec.times[i], rec.m_r[i], rec.sup_norm[i], rec.l2_norm[i]
        );
    }
    s
}

pub fn lemma_csv(verdict: &LemmaVerdict) -> String {
    let mut s = String::from("r,g,certified_error,bound_case\n");
    for smp in &verdict.samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            smp.r,
            smp.g,
            smp.error,
            verdict.regime.label()
        );
    }
    s
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::from(
        "mu,r_star,in_regime,fit_eligible,condition_holds,m0,threshold,t_bound,t_closed_form,t_num,blown_up,stop,steps,dt,status\n",
    );
    for r in &result.rows {
        let stop = r
            .stop
            .map(|s| format!("{s:?}").to_lowercase())
            .unwrap_or_default();
        let status = match &r.status {
            RowStatus::Ok => "ok".to_string(),
            RowStatus::Failed(msg) => format!("\"failed: {}\"", msg.replace('"', "'")),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.mu,
            opt(r.r_star),
            r.in_regime,
            r.fit_eligible(result.plan.kind),
            r.condition_holds,
            opt(r.m0),
            opt(r.threshold),
            opt(r.t_bound),
            opt(r.t_closed_form),
            opt(r.t_num),
            r.blown_up,
            stop,
            r.steps,
            opt(r.dt),
            status
        );
    }
    s
}

/// `r,value,certified_error` rows.
pub fn values_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("r,value,certified_error\n");
    for (r, v, e) in rows {
        let _ = writeln!(s, "{r},{v},{e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::StopReason;

    #[test]
    fn trajectory_columns() {
        let rec = TrajectoryRecord {
            times: vec![0.0, 0.5],
            m_r: vec![1.0, 2.0],
            sup_norm: vec![3.0, 4.0],
            l2_norm: vec![5.0, 6.0],
            blown_up: false,
            t_num: None,
            stop: StopReason::Horizon,
            threshold: 60.0,
            weight_radius: 1.0,
            steps: 1,
            spectral_tail: 0.0,
        };
        assert_eq!(
            trajectory_csv(&rec),
            "t,M_R,sup_norm,l2_norm\n0,1,3,5\n0.5,2,4,6\n"
        );
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("a.csv");
        write_atomic(&path, b"x\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }
}
