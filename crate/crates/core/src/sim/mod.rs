//! Killed sample paths, first-exit stopping and announcing sequences.

pub mod path;
pub mod simulate;

pub use path::{read_binary, stopped_state, write_binary, write_csv, Path, BINARY_MAGIC};
pub use simulate::{
    announcing_sequence, map_paths, map_paths_serial, simulate_path, simulate_paths, CompactK, SimulationConfig,
};
