//! The guiding state, its one-step update, the good-region check, and the
//! extension loop.

mod config;
mod gamma;
pub(crate) mod geometry;
mod run;
mod state;

pub use config::ProcessConfig;
pub use gamma::{
    check_gamma, check_gamma_with, phi, GammaConstants, GammaReport, GammaStats, GammaViolation,
    Inequality, Location,
};
pub use run::{run_process, ProcessOutcome, ProcessResult};
pub use state::{
    advance_state, central_projections, init_state, kill_mask, GuidanceState, KillMask, StateJson,
};
