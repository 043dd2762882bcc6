use num_complex::Complex64;

use fracblow::blowup_theory::DataKind;
use fracblow::evolution::{EvolutionConfig, ProblemParams};
use fracblow::frac_operator::PVQuadratureConfig;
use fracblow::harness::output::sweep_csv;
use fracblow::harness::sweep::RowStatus;
use fracblow::harness::{run_sweep, SweepPlan};
use fracblow::GridSpec;

fn small_plan(mus: Vec<f64>) -> SweepPlan {
    let params = ProblemParams::with_default_alpha(1, 2.0, Complex64::new(0.0, 1.0)).unwrap();
    let grid = GridSpec::new(1, 8.0, 1 << 14).unwrap();
    let mut evolution = EvolutionConfig::new(grid, 1e-3, 1.0);
    evolution.halving_limit = 12;
    SweepPlan {
        params,
        kind: DataKind::InnerSingular,
        k: 0.25,
        mus,
        evolution,
        horizon_factor: 1.5,
        steps_per_bound: 100.0,
        quadrature: PVQuadratureConfig::default(),
        a_hat: Some(1.0),
        workers: 2,
        keep_trajectories: false,
    }
}

#[test]
fn failed_row_does_not_stop_the_sweep() {
    // R* underflows to zero at the last amplitude
    let plan = small_plan(vec![20.0, 40.0, 80.0, 160.0, 1e300]);
    let result = run_sweep(&plan).unwrap();
    assert_eq!(result.rows.len(), 5);
    assert!(matches!(result.rows[4].status, RowStatus::Failed(_)));
    assert!(result.rows[..4].iter().all(|r| r.is_ok() && r.blown_up));
    assert!(result.warnings.iter().any(|w| w.contains("failed")));
    assert!(result.t_num_fit.is_some());
    let csv = sweep_csv(&result);
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().last().unwrap().contains("failed"));
}

#[test]
fn single_amplitude_gives_rows_only() {
    let result = run_sweep(&small_plan(vec![50.0])).unwrap();
    assert_eq!(result.rows.len(), 1);
    assert!(result.t_num_fit.is_none() && result.t_bound_fit.is_none());
    assert!(result
        .warnings
        .iter()
        .any(|w| w.contains("no exponent fit")));
}

#[test]
fn bound_column_is_an_exact_power_law() {
    let plan = small_plan(SweepPlan::amplitudes(20.0, 200.0, 4));
    let result = run_sweep(&plan).unwrap();
    let fit = result.t_bound_fit.unwrap();
    assert!((fit.exponent - result.predicted_exponent).abs() < 1e-12);
    assert!(result
        .rows
        .iter()
        .all(|r| r.t_num.unwrap() <= 1.1 * r.t_bound.unwrap()));
}

#[test]
fn sweeps_are_deterministic() {
    let plan = small_plan(vec![30.0, 90.0]);
    let a = sweep_csv(&run_sweep(&plan).unwrap());
    let b = sweep_csv(&run_sweep(&plan).unwrap());
    assert_eq!(a, b);
}

#[test]
fn integrable_data_cannot_be_swept() {
    let mut plan = small_plan(vec![1.0]);
    plan.kind = DataKind::Integrable;
    assert!(run_sweep(&plan).is_err());
}
