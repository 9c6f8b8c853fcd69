#![allow(dead_code)]

use fsl_core::models::{make_ito, parse_params, SpaceKind};
use fsl_core::symbol::{JumpLaw, JumpMeasure};
use fsl_core::{build_model, CutoffKappa, LevyTriplet, ProcessModel, StateSpace, SymbolField};

pub fn registry(name: &str, params: &[&str]) -> ProcessModel {
    build_model(name, &parse_params(params.iter().copied()).unwrap()).unwrap()
}

/// State-dependent Itô field with Gaussian jumps: `ℓ = -x`, `Q = 1 + x²/4`, `N = (1 + sin² x) N(0.3, 0.5²)`.
pub fn jumpy_ito() -> ProcessModel {
    let field = SymbolField::new(StateSpace::all(1), true, |x| {
        let jumps = JumpMeasure::FiniteActivity {
            rate: 1.0 + x[0].sin().powi(2),
            law: JumpLaw::Normal1d { mean: 0.3, std: 0.5 },
        };
        LevyTriplet::scalar(0.0, -x[0], 1.0 + 0.25 * x[0] * x[0], jumps)
    });
    make_ito("jumpy", "jumpy ito", field, CutoffKappa::indicator(1.0).unwrap())
}

/// Every registry model with a representative parameter set, plus [`jumpy_ito`].
pub fn zoo() -> Vec<ProcessModel> {
    vec![
        registry("levy", &["variance=1"]),
        registry("levy", &["drift=0.5", "rate=1", "jump=1", "kappa-radius=0.5"]),
        registry("levy", &["drift=-0.2", "variance=0.5", "rate=2", "jump=-1.5", "kappa-form=smooth-ramp"]),
        registry("killed-levy", &["variance=1", "killing=0.5"]),
        registry("superdrift", &[]),
        registry("sign-drift", &[]),
        registry("levy-sde", &[]),
        registry("levy-sde", &["phi=x", "rate=1", "jump=0.5"]),
        registry("subordinator", &[]),
        jumpy_ito(),
    ]
}

/// Maps a raw coordinate into the model's state space.
pub fn point_in(model: &ProcessModel, raw: f64) -> Vec<f64> {
    match model.space().kind() {
        SpaceKind::PositiveHalfline => vec![raw.abs() + 0.1],
        _ => vec![raw],
    }
}
