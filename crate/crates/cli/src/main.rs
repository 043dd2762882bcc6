//! `fracblow`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fracblow::blowup_theory::{corollary_radius, lifespan_bound, m_r, make_initial_data, DataKind};
use fracblow::evolution::evolve;
use fracblow::frac_operator::{
    frac_laplacian_pv_batch, normalization_constant, Gaussian, WeightProfile,
};
use fracblow::harness::config::ApplyProfile;
use fracblow::harness::output::{
    lemma_csv, sweep_csv, trajectory_csv, values_csv, write_atomic, write_json,
};
use fracblow::harness::{constants_report, run_lemma_suite, run_sweep, Config, Manifest};
use fracblow::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fracblow",
    version,
    about = "Half Laplacian estimates and blow-up experiments for the half-wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Normalization, decay and blow-up constants.
    Constants(Io),
    /// Half Laplacian of a radial profile at given radii.
    FracApply(Io),
    /// Decay regimes of the half Laplacian of algebraic weights.
    VerifyLemma(Io),
    /// One evolution with blow-up detection.
    Evolve(Io),
    /// Lifespan against amplitude.
    Sweep(Io),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Constants(io) => with_config(io, constants),
        Command::FracApply(io) => with_config(io, frac_apply),
        Command::VerifyLemma(io) => with_config(io, verify_lemma),
        Command::Evolve(io) => with_config(io, evolve_once),
        Command::Sweep(io) => with_config(io, sweep),
    };
    match result {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn with_config(io: &Io, run: fn(&Config, &Path) -> Result<Vec<String>>) -> Result<Vec<String>> {
    let cfg = Config::load(&io.config)?;
    run(&cfg, &io.out)
}

fn manifest<T: Serialize>(
    out: &Path,
    name: &str,
    command: &str,
    files: Vec<String>,
    warnings: &[String],
    report: &T,
) -> Result<()> {
    write_json(
        &out.join(name),
        &Manifest::new(command, files, warnings, report),
    )
}

fn constants(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let params = cfg.problem()?;
    let report = constants_report(&params, cfg.a_hat(), &cfg.quadrature, &cfg.lemma.plan)?;
    manifest(out, "constants.json", "constants", vec![], &[], &report)?;
    println!(
        "B = {:.12}  W = {:.12}  A_hat = {:.6}  C = {:.6}  D = {:.6}",
        report.normalization,
        report.blowup.weight_mass,
        report.a_hat,
        report.blowup.c,
        report.blowup.d
    );
    Ok(vec![])
}

#[derive(Serialize)]
struct ApplyReport {
    n: usize,
    normalization: f64,
    normalization_error: f64,
    profile: ApplyProfile,
    q: Option<f64>,
    quadrature: fracblow::frac_operator::PVQuadratureConfig,
}

fn frac_apply(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let apply = cfg
        .apply
        .clone()
        .ok_or_else(|| Error::Config("missing [apply] section".into()))?;
    let n = match apply.n {
        Some(n) => n,
        None => cfg.problem()?.n,
    };
    if apply.radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::Config(
            "[apply] radii must be finite and non-negative".into(),
        ));
    }
    cfg.quadrature.validate()?;
    let b = normalization_constant(n, &cfg.quadrature)?;
    let values = match apply.profile {
        ApplyProfile::Weight => {
            let w = WeightProfile::unit(apply.q)?;
            frac_laplacian_pv_batch(&w, n, &apply.radii, b.value, &cfg.quadrature)
        }
        ApplyProfile::Gaussian => {
            frac_laplacian_pv_batch(&Gaussian::unit(), n, &apply.radii, b.value, &cfg.quadrature)
        }
    };
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<(f64, f64, f64)> = apply
        .radii
        .iter()
        .zip(&values)
        .map(|(&r, e)| (r, e.value, e.error))
        .collect();
    write_atomic(&out.join("frac_apply.csv"), values_csv(&rows).as_bytes())?;
    let report = ApplyReport {
        n,
        normalization: b.value,
        normalization_error: b.error,
        profile: apply.profile,
        q: (apply.profile == ApplyProfile::Weight).then_some(apply.q),
        quadrature: cfg.quadrature,
    };
    manifest(
        out,
        "frac_apply.json",
        "frac-apply",
        vec!["frac_apply.csv".into()],
        &[],
        &report,
    )?;
    Ok(vec![])
}

fn verify_lemma(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let report = run_lemma_suite(&cfg.lemma, &cfg.quadrature)?;
    let mut files = Vec::new();
    for v in &report.verdicts {
        let name = match v.q {
            Some(q) => format!("lemma_n{}_q{q}.csv", v.n),
            None => format!("lemma_n{}_gaussian.csv", v.n),
        };
        write_atomic(&out.join(&name), lemma_csv(v).as_bytes())?;
        files.push(name);
    }
    manifest(
        out,
        "lemma.json",
        "verify-lemma",
        files,
        &report.warnings,
        &report,
    )?;
    for e in &report.table {
        println!(
            "n={} q={:<8} {:<8} A_hat={:<12.6} {}",
            e.n,
            e.q.map(|q| q.to_string())
                .unwrap_or_else(|| "gaussian".into()),
            e.regime,
            e.a_hat,
            if e.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(report.warnings)
}

#[derive(Serialize)]
struct EvolveReport {
    constants: fracblow::harness::ConstantsReport,
    data: fracblow::blowup_theory::InitialDataSpec,
    evolution: fracblow::evolution::EvolutionConfig,
    weight_radius: f64,
    corollary: Option<fracblow::blowup_theory::CorollaryReport>,
    lifespan: fracblow::blowup_theory::LifespanReport,
    blown_up: bool,
    t_num: Option<f64>,
    stop: fracblow::evolution::StopReason,
    steps: usize,
    spectral_tail: f64,
}

fn evolve_once(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let params = cfg.problem()?;
    let grid = cfg.grid()?;
    let spec = cfg.data()?;
    let evo = cfg.evolution.config(grid);
    evo.validate()?;
    let constants = constants_report(&params, cfg.a_hat(), &cfg.quadrature, &cfg.lemma.plan)?;
    let u0 = make_initial_data(&spec, grid, &params)?;
    let corollary = match spec.kind {
        DataKind::Integrable => None,
        _ => Some(corollary_radius(&spec, &constants.blowup, &params, &u0)?),
    };
    let radius = cfg
        .evolution
        .weight_radius
        .or(corollary.map(|c| c.r_star))
        .unwrap_or(1.0);
    let weight = WeightProfile::new(params.n as f64 + 1.0, radius)?;
    let lifespan = lifespan_bound(
        m_r(&u0, params.alpha, &weight)?,
        &constants.blowup,
        radius,
        &params,
    );
    let rec = evolve(&u0, &params, &evo, &weight)?;
    write_atomic(&out.join("trajectory.csv"), trajectory_csv(&rec).as_bytes())?;
    let mut warnings = Vec::new();
    if !lifespan.condition_holds {
        warnings.push(format!(
            "no lifespan bound at R = {radius}: M_R(0) does not exceed C R^(n-1/(p-1))"
        ));
    }
    let report = EvolveReport {
        constants,
        data: spec,
        evolution: evo,
        weight_radius: radius,
        corollary,
        lifespan,
        blown_up: rec.blown_up,
        t_num: rec.t_num,
        stop: rec.stop,
        steps: rec.steps,
        spectral_tail: rec.spectral_tail,
    };
    manifest(
        out,
        "evolve.json",
        "evolve",
        vec!["trajectory.csv".into()],
        &warnings,
        &report,
    )?;
    println!(
        "R = {radius:.6}  M_R(0) = {:.6e}  T bound = {}  T_num = {}  stop = {:?}",
        lifespan.m0,
        lifespan
            .t_bound
            .map(|t| format!("{t:.6e}"))
            .unwrap_or_else(|| "none".into()),
        rec.t_num
            .map(|t| format!("{t:.6e}"))
            .unwrap_or_else(|| "none".into()),
        rec.stop
    );
    Ok(warnings)
}

fn sweep(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let plan = cfg.sweep_plan()?;
    let result = run_sweep(&plan)?;
    let mut files = vec!["sweep.csv".to_string()];
    write_atomic(&out.join("sweep.csv"), sweep_csv(&result).as_bytes())?;
    for (i, row) in result.rows.iter().enumerate() {
        if let Some(rec) = &row.trajectory {
            let name = format!("trajectory_{i:02}.csv");
            write_atomic(&out.join(&name), trajectory_csv(rec).as_bytes())?;
            files.push(name);
        }
    }
    manifest(out, "sweep.json", "sweep", files, &result.warnings, &result)?;
    let show = |f: Option<fracblow::harness::PowerLawFit>| {
        f.map(|f| format!("{:.4}", f.exponent))
            .unwrap_or_else(|| "n/a".into())
    };
    println!(
        "predicted exponent {:.4}  T_num fit {}  T bound fit {}",
        result.predicted_exponent,
        show(result.t_num_fit),
        show(result.t_bound_fit)
    );
    if result.rows.iter().all(|r| !r.is_ok()) {
        return Err(Error::Fit("every run in the sweep failed".into()));
    }
    Ok(result.warnings)
}
