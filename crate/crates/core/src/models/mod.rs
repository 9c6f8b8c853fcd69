pub mod model;
pub mod registry;
pub mod space;

pub use model::{
    make_ito, make_killed_levy, make_levy, make_levy_sde, make_sign_drift, make_subordinator, make_superdrift, Killing,
    PhiFn, ProcessModel, StepperState,
};
pub use registry::{build_model, parse_params, Params, MODEL_NAMES};
pub use space::{SpaceKind, StateSpace};
