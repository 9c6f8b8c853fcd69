//! Lévy-Khintchine symbols of Feller and Itô processes with killing: evaluation, simulation,
//! Monte Carlo estimation of the probabilistic symbol and checks of the generator identities.

// range checks are written negated so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimators;
pub mod expr;
pub mod models;
pub mod operator;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod symbol;

pub use error::{Error, Result};
pub use models::{build_model, Killing, ProcessModel, StateSpace};
pub use num_complex::Complex64;
pub use operator::{apply_iq, apply_pseudo_fourier, operator_identity_check, TestFunction};
pub use sim::{announcing_sequence, simulate_path, stopped_state, Path, SimulationConfig};
pub use symbol::{evaluate_symbol, CutoffKappa, JumpMeasure, LevyTriplet, SymbolField};

/// Sign with `sgn(0) = 0`.
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
