//! Wire messages: one JSON object per line.
//!
//! Every message carries `type`, `seq` and `t_ms`. Commands are numbered by
//! the client; the terminal event of a command echoes its `seq`. Events not
//! caused by a command (periodic snapshots, stability warnings) use `seq` 0.

use serde::{Deserialize, Serialize};

use dactyl_core::kinematics::Contact;

use crate::state::{Grasp, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionDirection {
    /// Stance to dual-leg manipulation via the three keyframes.
    ToDual,
    /// Back to four-legged stance.
    ToStance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Command {
    SetJointTarget {
        joint: usize,
        target_rad: f64,
    },
    /// Foot target for one leg in the body frame, m.
    SetLegTarget {
        leg: usize,
        target_m: [f64; 3],
    },
    SetGripForce {
        dactylus: usize,
        force_n: f64,
    },
    BeginTransition {
        direction: TransitionDirection,
    },
    Query,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandMessage {
    #[serde(flatten)]
    pub command: Command,
    pub seq: u64,
    /// Simulation time at which to apply the command; commands dated in the
    /// past apply immediately.
    #[serde(default)]
    pub t_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    /// Command not allowed in the current mode.
    Mode,
    Unreachable,
    JointLimit,
    /// The planned motion would leave the support polygon.
    Unstable,
    ActuationLimit,
    Preempted,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub mode: Mode,
    /// 12 leg joints (coxa, femur, tibia per leg) then 6 dactylus joints
    /// (wrist, base, tip per front leg), rad.
    pub joints: Vec<f64>,
    pub contacts: [Contact; 4],
    pub body_pitch_rad: f64,
    /// Centre of mass in the body frame, m.
    pub com_m: [f64; 3],
    pub margin_m: f64,
    pub grip_force_n: [f64; 2],
    pub servo_alpha_rad: [f64; 2],
    pub grasps: [Grasp; 2],
    /// `seq` of every command still running.
    pub active: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Event {
    StateSnapshot(Snapshot),
    TrajectoryStarted { duration_s: f64, joints: Vec<usize> },
    TrajectoryCompleted,
    StabilityWarning { margin_m: f64 },
    Error { code: ErrorCode, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMessage {
    #[serde(flatten)]
    pub event: Event,
    pub seq: u64,
    pub t_ms: u64,
}

impl EventMessage {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self.event,
            Event::TrajectoryCompleted | Event::Error { .. } | Event::StateSnapshot(_)
        ) && self.seq != 0
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialise")
    }
}

impl CommandMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("commands always serialise")
    }
}

/// Parses one command line. On failure returns the `seq` found in the
/// line, if any, so the error can still be attributed.
pub fn parse_command(line: &str) -> Result<CommandMessage, (u64, String)> {
    serde_json::from_str::<CommandMessage>(line).map_err(|e| {
        let seq = serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("seq").and_then(|s| s.as_u64()))
            .unwrap_or(0);
        (seq, e.to_string())
    })
}
