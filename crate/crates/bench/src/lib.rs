//! Shared fixtures for the benchmarks.

use fsl_core::models::parse_params;
use fsl_core::{build_model, ProcessModel};

pub fn model(name: &str, params: &[&str]) -> ProcessModel {
    build_model(name, &parse_params(params.iter().copied()).expect("valid params")).expect("registry model")
}

/// Drifting Brownian motion plus compound Poisson jumps.
pub fn jump_diffusion() -> ProcessModel {
    model("levy", &["drift=0.5", "variance=1", "rate=2", "jump=0.7", "kappa-radius=0.5"])
}

/// `dX = (sin X + 2) dZ` with a jumping driver.
pub fn sde() -> ProcessModel {
    model("levy-sde", &["rate=1", "jump=0.5"])
}
