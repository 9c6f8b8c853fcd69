use fsl_core::models::{build_model, parse_params, SpaceKind};
use fsl_core::{ProcessModel, Result};

/// A named model from the registry with fixed parameters.
pub struct BuiltIn {
    pub label: &'static str,
    pub model: &'static str,
    pub params: &'static [&'static str],
}

impl BuiltIn {
    pub fn build(&self) -> Result<ProcessModel> {
        build_model(self.model, &parse_params(self.params.iter().copied())?)
    }
}

/// The reference models exercised by `verify` and by the acceptance suite.
pub const BUILTINS: [BuiltIn; 7] = [
    BuiltIn { label: "brownian", model: "levy", params: &["variance=1"] },
    BuiltIn {
        label: "drift-compound-poisson",
        model: "levy",
        params: &["drift=0.5", "rate=1", "jump=1", "kappa-radius=0.5"],
    },
    BuiltIn { label: "killed-brownian", model: "killed-levy", params: &["variance=1", "killing=0.5"] },
    BuiltIn { label: "superdrift", model: "superdrift", params: &[] },
    BuiltIn { label: "sign-drift", model: "sign-drift", params: &[] },
    BuiltIn { label: "sin-sde", model: "levy-sde", params: &[] },
    BuiltIn { label: "subordinator", model: "subordinator", params: &[] },
];

pub fn builtin(label: &str) -> Option<&'static BuiltIn> {
    BUILTINS.iter().find(|b| b.label == label)
}

/// `count` evenly spaced states inside the model's state space.
pub fn sample_states(model: &ProcessModel, count: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = match model.space().kind() {
        SpaceKind::AllOfRd => (-2.0, 2.0),
        SpaceKind::OpenInterval { a, b } => (a + 0.05 * (b - a), b - 0.05 * (b - a)),
        SpaceKind::PositiveHalfline => (0.1, 4.0),
        SpaceKind::OpenBox { lo, hi } => (lo[0] + 0.05 * (hi[0] - lo[0]), hi[0] - 0.05 * (hi[0] - lo[0])),
    };
    let d = model.dim();
    (0..count)
        .map(|i| {
            let s = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            vec![lo + s * (hi - lo); d]
        })
        .collect()
}
