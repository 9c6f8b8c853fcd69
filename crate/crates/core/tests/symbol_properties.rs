mod common;

use common::{point_in, zoo};
use fsl_core::symbol::{
    growth_bound_check, integrand_bound_sweep, negative_definiteness_check, unit_ball_samples, FieldSymbol, Symbol,
};
use fsl_core::{evaluate_symbol, rng::path_rng, CutoffKappa, ProcessModel};
use proptest::prelude::*;
use rand::Rng;

const HERMITIAN_TOL: f64 = 1e-12;
const SUBADDITIVITY_SLACK: f64 = 1e-9;

fn q(m: &ProcessModel, x: &[f64], xi: f64) -> num_complex::Complex64 {
    evaluate_symbol(m.field(), x, &[xi], m.kappa()).unwrap()
}

fn model_index() -> impl Strategy<Value = usize> {
    0..zoo().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hermitian_symmetry(i in model_index(), raw in -3.0..3.0f64, xi in -10.0..10.0f64) {
        let m = &zoo()[i];
        let x = point_in(m, raw);
        let (a, b) = (q(m, &x, xi), q(m, &x, -xi));
        prop_assert!((b - a.conj()).norm() <= HERMITIAN_TOL * (1.0 + a.norm()), "{} x={x:?} ξ={xi}: {a} vs {b}", m.name());
    }

    #[test]
    fn value_at_zero_is_the_killing_rate(i in model_index(), raw in -3.0..3.0f64) {
        let m = &zoo()[i];
        let x = point_in(m, raw);
        let a = m.field().triplet_at(&x).unwrap().killing;
        let v = q(m, &x, 0.0);
        prop_assert_eq!(v.re, a);
        prop_assert_eq!(v.im, 0.0);
    }

    #[test]
    fn square_root_is_subadditive(i in model_index(), raw in -3.0..3.0f64, xi in -8.0..8.0f64, eta in -8.0..8.0f64) {
        let m = &zoo()[i];
        let x = point_in(m, raw);
        let lhs = q(m, &x, xi + eta).norm().sqrt();
        let rhs = q(m, &x, xi).norm().sqrt() + q(m, &x, eta).norm().sqrt();
        prop_assert!(lhs <= rhs + SUBADDITIVITY_SLACK, "{}: {lhs} > {rhs}", m.name());
    }

    #[test]
    fn growth_is_controlled_by_the_unit_ball(i in model_index(), raw in -3.0..3.0f64, xi in -30.0..30.0f64) {
        let m = &zoo()[i];
        let x = point_in(m, raw);
        let s = FieldSymbol { field: m.field(), kappa: *m.kappa() };
        let r = growth_bound_check(&s, &[x], &[vec![xi]], &unit_ball_samples(1, 41)).unwrap();
        prop_assert!(r.holds, "{}: {r:?}", m.name());
    }
}

#[test]
fn pure_scaling_fails_in_general() {
    // |q(ξ)| = k²|q(ξ/k)| is false once drift and diffusion mix
    let m = common::registry("levy", &["drift=1", "variance=1"]);
    let (k, xi) = (3.0, 2.0);
    let lhs = q(&m, &[0.0], xi).norm();
    let rhs = k * k * q(&m, &[0.0], xi / k).norm();
    assert!((lhs - rhs).abs() > 0.1 * lhs);
}

#[test]
fn integrand_bound_on_a_million_samples() {
    for kappa in [
        CutoffKappa::indicator(1.0).unwrap(),
        CutoffKappa::indicator(0.25).unwrap(),
        CutoffKappa::indicator(3.0).unwrap(),
        CutoffKappa::smooth_ramp(0.5).unwrap(),
    ] {
        let r = integrand_bound_sweep(&kappa, 1, 1_000_000, 11);
        assert!(r.passed(), "{}: {r:?}", kappa.label());
        let r = integrand_bound_sweep(&kappa, 2, 200_000, 12);
        assert!(r.passed(), "{} d=2: {r:?}", kappa.label());
    }
}

#[test]
fn every_model_is_negative_definite_at_random_states() {
    let mut rng = path_rng(2024, 0);
    for m in zoo() {
        for _ in 0..20 {
            let x = point_in(&m, rng.random_range(-3.0..3.0));
            let xis: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.random_range(-5.0..5.0)]).collect();
            let s = FieldSymbol { field: m.field(), kappa: *m.kappa() };
            let r = negative_definiteness_check(&s, &x, &xis).unwrap();
            assert!(r.passed(), "{} at {x:?}: {r:?}", m.name());
        }
    }
}

#[test]
fn eval_line_matches_pointwise_evaluation() {
    for m in zoo() {
        let x = point_in(&m, 0.7);
        let s = FieldSymbol { field: m.field(), kappa: *m.kappa() };
        let xis = [-3.0, -0.5, 0.0, 1.25, 4.0];
        let line = s.eval_line(&x, &xis).unwrap();
        for (xi, v) in xis.iter().zip(line) {
            assert_eq!(v, s.eval(&x, &[*xi]).unwrap(), "{}", m.name());
        }
    }
}
