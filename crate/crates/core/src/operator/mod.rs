//! Integro-differential and Fourier-side generators applied to test functions.

pub mod fourier;
pub mod iq;
pub mod test_fn;

pub use fourier::{
    apply_pseudo_fourier, operator_identity_check, operator_identity_check_with, FourierGrid, GridFunction1D,
};
pub use iq::{
    apply_iq, apply_iq_triplet, integrand_estimate_check, integrand_estimate_sweep, iq_parts, norm_estimate_check,
    IqParts,
};
pub use test_fn::{DerivativeNorms, Smoothness, TestFunction, CATALOG};
