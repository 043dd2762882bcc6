use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracblow::blowup_theory::{
    compute_constants, corollary_radius, lifespan_bound, make_initial_data, ode_lower_envelope,
    DataKind, InitialDataSpec,
};
use fracblow::evolution::{EvolutionConfig, Evolver, ProblemParams};
use fracblow::frac_operator::{
    cordoba_check, frac_laplacian_pv_radial, normalization_constant, PVQuadratureConfig,
    SpectralOperator, WeightProfile,
};
use fracblow::harness::fit_power_law;
use fracblow::{Field, GridSpec};

fn bumps(grid: GridSpec, params: &[(f64, f64, f64, f64)]) -> Field {
    Field::from_fn(grid, |x, y| {
        params
            .iter()
            .map(|&(c, w, a, b)| {
                Complex64::new(a, b) * (-((x - c).powi(2) + y * y) / (w * w)).exp()
            })
            .sum()
    })
}

fn bump_strategy() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec(
        (-3.0..3.0f64, 0.6..2.0f64, -1.0..1.0f64, -1.0..1.0f64),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_operator_is_linear(f in bump_strategy(), g in bump_strategy(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let grid = GridSpec::new(1, 16.0, 512).unwrap();
        let op = SpectralOperator::new(grid);
        let (ff, gg) = (bumps(grid, &f), bumps(grid, &g));
        let combo = ff.scale(a.into()).axpy(b.into(), &gg);
        let lhs = op.half_laplacian(&combo);
        let rhs = op.half_laplacian(&ff).scale(a.into()).axpy(b.into(), &op.half_laplacian(&gg));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn spectral_operator_is_symmetric_and_nonnegative(f in bump_strategy(), g in bump_strategy()) {
        let grid = GridSpec::new(2, 10.0, 64).unwrap();
        let op = SpectralOperator::new(grid);
        let (ff, gg) = (bumps(grid, &f), bumps(grid, &g));
        let left = op.half_laplacian(&ff).inner(&gg);
        let right = ff.inner(&op.half_laplacian(&gg));
        prop_assert!((left - right).norm() <= 1e-10 * (1.0 + left.norm()));
        let energy = op.half_laplacian(&ff).inner(&ff);
        prop_assert!(energy.re >= -1e-12 && energy.im.abs() <= 1e-10 * (1.0 + energy.re));
    }

    #[test]
    fn pointwise_commutator_sign(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = GridSpec::new(1, 20.0, 1024).unwrap();
        let comps: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..6))
            .map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let phi = bumps(grid, &comps);
        prop_assert!(cordoba_check(&phi) <= 1e-6 * phi.sup_norm().powi(2));
    }

    #[test]
    fn free_flow_is_unitary(f in bump_strategy(), dt in 0.001..0.2f64) {
        let grid = GridSpec::new(1, 16.0, 256).unwrap();
        let params = ProblemParams::free_flow(1, 2.0, Complex64::new(1.0, 0.0));
        let weight = WeightProfile::new(2.0, 1.0).unwrap();
        let mut ev = Evolver::new(params, EvolutionConfig::new(grid, dt, 1.0), weight).unwrap();
        let mut u = bumps(grid, &f);
        let before = u.l2_norm();
        for _ in 0..50 {
            ev.step(&mut u.values, dt);
        }
        prop_assert!((u.l2_norm() - before).abs() <= 1e-13 * before.max(1e-300));
    }

    #[test]
    fn weighted_functional_is_linear_in_amplitude(mu in 0.1..100.0f64) {
        let grid = GridSpec::new(1, 20.0, 2048).unwrap();
        let params = ProblemParams::with_default_alpha(1, 2.0, Complex64::new(0.0, 1.0)).unwrap();
        let unit = InitialDataSpec { kind: DataKind::Integrable, mu: 1.0, k: 0.0 };
        let scaled = InitialDataSpec { mu, ..unit };
        let w = WeightProfile::new(2.0, 1.7).unwrap();
        let m1 = fracblow::blowup_theory::m_r(&make_initial_data(&unit, grid, &params).unwrap(), params.alpha, &w).unwrap();
        let m2 = fracblow::blowup_theory::m_r(&make_initial_data(&scaled, grid, &params).unwrap(), params.alpha, &w).unwrap();
        prop_assert!((m2 - mu * m1).abs() <= 1e-12 * m2.abs());
    }

    #[test]
    fn conjugate_pairing_keeps_profile(re in -2.0..2.0f64, im in -2.0..2.0f64, mu in 0.1..10.0f64) {
        prop_assume!(re.hypot(im) > 0.05);
        let lambda = Complex64::new(re, im);
        let params = ProblemParams::new(1, 2.0, lambda, lambda.conj()).unwrap();
        let grid = GridSpec::new(1, 8.0, 256).unwrap();
        let spec = InitialDataSpec { kind: DataKind::InnerSingular, mu, k: 0.25 };
        let u = make_initial_data(&spec, grid, &params).unwrap();
        for (idx, z) in u.values.iter().enumerate() {
            let paired = lambda.conj() * z;
            let expect = mu * spec.profile(grid.radius(idx), 0.5 * grid.spacing());
            prop_assert!(paired.re.abs() <= 1e-12 * (1.0 + expect));
            prop_assert!((-paired.im - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }

    #[test]
    fn bound_is_finite_exactly_when_condition_holds(m0 in -5.0..50.0f64, r in 0.05..20.0f64, p in 1.2..3.0f64) {
        let params = ProblemParams::with_default_alpha(1, p, Complex64::new(0.0, 1.0)).unwrap();
        let c = compute_constants(&params, 1.2, &PVQuadratureConfig::default()).unwrap();
        let rep = lifespan_bound(m0, &c, r, &params);
        prop_assert_eq!(rep.condition_holds, m0 > c.threshold(r));
        prop_assert_eq!(rep.t_bound.is_some(), rep.condition_holds);
        if let Some(t) = rep.t_bound {
            prop_assert!(t.is_finite() && t > 0.0);
            let times: Vec<f64> = (0..20).map(|j| 0.999 * t * j as f64 / 19.0).collect();
            let env = ode_lower_envelope(m0, &c, r, &params, &times).unwrap();
            prop_assert!((env[0] - rep.gap).abs() <= 1e-12 * rep.gap);
            prop_assert!(env.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn closed_form_bound_follows_the_power_law(mu in 20.0..500.0f64) {
        let params = ProblemParams::with_default_alpha(1, 2.0, Complex64::new(0.0, 1.0)).unwrap();
        let c = compute_constants(&params, 1.2, &PVQuadratureConfig::default()).unwrap();
        let grid = GridSpec::new(1, 4.0, 512).unwrap();
        let report = |mu: f64| {
            let spec = InitialDataSpec { kind: DataKind::InnerSingular, mu, k: 0.25 };
            corollary_radius(&spec, &c, &params, &make_initial_data(&spec, grid, &params).unwrap()).unwrap()
        };
        let (a, b) = (report(mu), report(2.0 * mu));
        let expect = 2f64.powf(a.predicted_exponent);
        prop_assert!((b.t_closed_form / a.t_closed_form - expect).abs() <= 1e-13);
        prop_assert!((a.predicted_exponent + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_power_laws_are_recovered(e in -3.0..1.0f64, c in 0.01..100.0f64) {
        let pairs: Vec<(f64, f64)> = (0..6).map(|j| {
            let m = 10f64.powf(j as f64 / 5.0);
            (m, c * m.powf(e))
        }).collect();
        let fit = fit_power_law(&pairs).unwrap();
        prop_assert!((fit.exponent - e).abs() < 1e-12 && fit.residual < 1e-12);
    }
}

#[test]
fn outer_decay_uses_the_capped_exponent() {
    let params = ProblemParams::with_default_alpha(1, 1.2, Complex64::new(0.0, 1.0)).unwrap();
    let c = compute_constants(&params, 1.2, &PVQuadratureConfig::default()).unwrap();
    let grid = GridSpec::new(1, 64.0, 4096).unwrap();
    let spec = InitialDataSpec {
        kind: DataKind::OuterDecay,
        mu: 0.01,
        k: 3.0,
    };
    let rep = corollary_radius(
        &spec,
        &c,
        &params,
        &make_initial_data(&spec, grid, &params).unwrap(),
    )
    .unwrap();
    assert_eq!(rep.effective_k, 1.0);
    assert!((rep.predicted_exponent + 1.0 / 4.0).abs() < 1e-15);
}

#[test]
fn noisy_power_law_fit() {
    // 5% multiplicative noise, 8 points over one decade, 200 seeded repetitions
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|j| {
                let m = 10f64.powf(j as f64 / 7.0);
                let noise = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
                (m, 3.0 * m.powf(-2.0) * noise)
            })
            .collect();
        worst = worst.max((fit_power_law(&pairs).unwrap().exponent + 2.0).abs());
    }
    assert!(worst < 0.1, "{worst}");
}

#[test]
fn pv_scale_covariance() {
    // the half Laplacian of <x/R>^{-q} at r equals R^{-1} times the unit-scale value at r/R
    let cfg = PVQuadratureConfig::default();
    for n in [1usize, 2] {
        let b = normalization_constant(n, &cfg).unwrap().value;
        for (q, scale, r) in [(2.0, 3.0, 1.5), (1.0, 0.5, 4.0), (3.0, 10.0, 25.0)] {
            let scaled =
                frac_laplacian_pv_radial(&WeightProfile::new(q, scale).unwrap(), n, r, b, &cfg)
                    .unwrap();
            let unit =
                frac_laplacian_pv_radial(&WeightProfile::unit(q).unwrap(), n, r / scale, b, &cfg)
                    .unwrap();
            let diff = (scaled.value - unit.value / scale).abs();
            assert!(
                diff <= 2.0 * (scaled.error + unit.error / scale),
                "n={n} q={q} R={scale}: {diff:e}"
            );
        }
    }
}
