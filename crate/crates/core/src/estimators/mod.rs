//! Probabilistic symbol estimation, semimartingale characteristics and martingale checks.

pub mod characteristics;
pub mod martingale;
pub mod symbol_est;

pub use characteristics::{compute_characteristics, CharacteristicsRecord, Kernel};
pub use martingale::{
    compensator_samples, compensator_test, dynkin_check, martingale_samples, martingale_test, DynkinReport,
    MartingaleReport, DETERMINISTIC_TOL,
};
pub use symbol_est::{
    compare_estimate, estimate_symbol, estimate_symbols, geometric_t_grid, independence_of_k_check, KSpread,
    SymbolComparison, SymbolEstimate,
};
