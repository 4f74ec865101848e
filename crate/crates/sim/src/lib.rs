//! Tick-based quadruped simulator with dactylus grippers, and the JSON
//! command/event protocol used to drive it.
//!
//! The simulator runs at 1 kHz. A [`Session`] wraps it with periodic
//! telemetry; scenarios replay through a session directly, and the
//! [`server`] exposes the same session over TCP and websockets.

pub mod config;
pub mod protocol;
pub mod scenario;
pub mod script;
pub mod server;
pub mod session;
pub mod state;

pub use config::{ObjectSpec, SimConfig};
pub use protocol::{
    Command, CommandMessage, ErrorCode, Event, EventMessage, Snapshot, TransitionDirection,
};
pub use session::Session;
pub use state::{Grasp, Mode, Simulator};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Io(String),
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] dactyl_core::Error),
}

/// Session over the default robot model.
pub fn default_session(config: SimConfig) -> Result<Session, SimError> {
    let robot = dactyl_core::model::ModelFile::default().robot();
    Ok(Session::new(Simulator::new(config, robot)?))
}
