use num_complex::Complex64;

use fracblow::blowup_theory::{make_initial_data, DataKind, InitialDataSpec};
use fracblow::evolution::{evolve, EvolutionConfig, ProblemParams, StopReason};
use fracblow::frac_operator::WeightProfile;
use fracblow::GridSpec;

fn params(p: f64) -> ProblemParams {
    ProblemParams::with_default_alpha(1, p, Complex64::new(0.0, 1.0)).unwrap()
}

#[test]
fn inner_singular_norm_converges_under_refinement() {
    // exact L² norm² of |x|^{-1/4} on [-1, 1] is 2 / (1 - 1/2) = 4
    let spec = InitialDataSpec {
        kind: DataKind::InnerSingular,
        mu: 1.0,
        k: 0.25,
    };
    let errs: Vec<f64> = [1 << 12, 1 << 14, 1 << 16]
        .iter()
        .map(|&pts| {
            let grid = GridSpec::new(1, 4.0, pts).unwrap();
            let u = make_initial_data(&spec, grid, &params(2.0)).unwrap();
            (u.l2_norm().powi(2) - 4.0).abs()
        })
        .collect();
    // the lattice sum of |x|^{-1/2} converges like dx^{1/2}: error halves per 4x refinement
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn outer_decay_norms_are_finite_and_stable() {
    // k = 3 > n: L¹ norm 2 ∫_1^∞ x^{-3} dx = 1 and L² norm² 2 ∫_1^∞ x^{-6} dx = 2/5
    let spec = InitialDataSpec {
        kind: DataKind::OuterDecay,
        mu: 1.0,
        k: 3.0,
    };
    let p = params(1.2);
    for pts in [1 << 14, 1 << 16] {
        let grid = GridSpec::new(1, 200.0, pts).unwrap();
        let u = make_initial_data(&spec, grid, &p).unwrap();
        assert!((u.l1_norm() - 1.0).abs() < 0.03, "{}", u.l1_norm());
        assert!((u.l2_norm().powi(2) - 0.4).abs() < 0.03);
    }
}

#[test]
fn integrable_data_blow_up_before_the_bound() {
    let grid = GridSpec::new(1, 16.0, 4096).unwrap();
    let spec = InitialDataSpec {
        kind: DataKind::Integrable,
        mu: 5.0,
        k: 0.0,
    };
    let u0 = make_initial_data(&spec, grid, &params(2.0)).unwrap();
    let cfg = EvolutionConfig::new(grid, 1e-3, 5.0);
    let rec = evolve(
        &u0,
        &params(2.0),
        &cfg,
        &WeightProfile::new(2.0, 1.0).unwrap(),
    )
    .unwrap();
    assert!(rec.blown_up && rec.stop == StopReason::Threshold);
    assert!(rec.m_r.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(rec.times.len(), rec.steps + 1);
}
