//! Lévy-Khintchine symbols: cut-offs, jump measures, triplets, fields and their checks.

pub mod checks;
pub mod cutoff;
pub mod field;
pub mod jump;
pub mod triplet;

pub use checks::{
    b_epsilon, growth_bound_check, growth_constant, integrand_bound_check, integrand_bound_sweep,
    negative_definiteness_check, negative_definiteness_check_with, unit_ball_samples, BoundCheck, GrowthReport,
    NegDefReport, SweepReport,
};
pub use cutoff::{CutoffForm, CutoffKappa};
pub use field::{evaluate_symbol, evaluate_symbol_with, ClosureSymbol, FieldSymbol, Symbol, SymbolField};
pub use jump::{Atom, JumpLaw, JumpMeasure};
pub use triplet::LevyTriplet;
