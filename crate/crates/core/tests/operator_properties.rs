mod common;

use common::{jumpy_ito, point_in, zoo};
use fsl_core::operator::{integrand_estimate_sweep, TestFunction, CATALOG};
use fsl_core::symbol::{Atom, JumpMeasure};
use fsl_core::{apply_iq, CutoffKappa, LevyTriplet, StateSpace, SymbolField};
use proptest::prelude::*;

const LINEARITY_TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn iq_is_linear(
        i in 0..zoo().len(),
        raw in -2.5..2.5f64,
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        cu in -1.0..1.0f64,
        cv in -1.0..1.0f64,
    ) {
        let m = &zoo()[i];
        prop_assume!(m.field().triplet_at(&point_in(m, raw)).unwrap().killing == 0.0);
        let x = point_in(m, raw);
        let u = TestFunction::cosine_bump(cu + x[0], 1.5, 1.0);
        let v = TestFunction::gaussian_bump(vec![cv + x[0]], 0.4, 2.0);
        let w = TestFunction::linear_combination(alpha, &u, beta, &v).unwrap();
        let (iu, iv, iw) = (
            apply_iq(&u, &x, m.field(), m.kappa()).unwrap(),
            apply_iq(&v, &x, m.field(), m.kappa()).unwrap(),
            apply_iq(&w, &x, m.field(), m.kappa()).unwrap(),
        );
        let scale = 1.0 + alpha.abs() * iu.abs() + beta.abs() * iv.abs();
        prop_assert!((iw - alpha * iu - beta * iv).abs() <= LINEARITY_TOL * scale, "{}: {iw} vs {}", m.name(), alpha * iu + beta * iv);
    }
}

#[test]
fn constants_are_annihilated_locally() {
    let r = 0.75;
    let kappa = CutoffKappa::indicator(r).unwrap();
    let jumps =
        JumpMeasure::atomic(vec![Atom::new(vec![0.5], 1.3), Atom::new(vec![-0.7], 0.4), Atom::new(vec![0.1], 2.0)]);
    let triplet = LevyTriplet::scalar(0.0, 0.8, 1.7, jumps).unwrap();
    let field = SymbolField::constant(StateSpace::all(1), triplet);
    for x in [-1.0, 0.0, 2.5] {
        let u = TestFunction::plateau(x, 3.0 * r, 3.0 * r + 1.0, 4.2);
        let v = apply_iq(&u, &[x], &field, &kappa).unwrap();
        assert_eq!(v, 0.0, "x = {x}");
    }
}

#[test]
fn iq_of_zero_is_zero_everywhere() {
    let m = jumpy_ito();
    let z = TestFunction::zero(1);
    for x in [-3.0, 0.0, 1.1] {
        assert_eq!(apply_iq(&z, &[x], m.field(), m.kappa()).unwrap(), 0.0);
    }
}

#[test]
fn integrand_estimate_on_catalog_functions() {
    for kappa in [CutoffKappa::indicator(1.0).unwrap(), CutoffKappa::indicator(2.5).unwrap()] {
        for (k, name) in CATALOG.iter().enumerate() {
            for (center, scale) in [(0.0, 1.0), (0.5, 0.3)] {
                let u = TestFunction::from_catalog(name, center, scale, 1.0).unwrap();
                let r = integrand_estimate_sweep(&u, &kappa, 100_000, 40 + k as u64);
                assert!(r.passed(), "{name} ({center}, {scale}) R={}: {r:?}", kappa.radius());
            }
        }
    }
}
