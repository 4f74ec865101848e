//! The scripted stance ↔ dual-leg transition.
//!
//! Going up, the robot first plants its hind tibiae flat behind it, then
//! pitches the body nose-up by rotating the hind femurs while the front feet
//! still bear weight, and finally lifts the front legs clear. Coming down
//! runs the same keyframes in reverse and ends on the pose the robot stood
//! in before it went up.

use serde::{Deserialize, Serialize};

use dactyl_core::kinematics::robot::LegJoints;
use dactyl_core::kinematics::{Contact, RobotModel};

use crate::state::Mode;

const F: Contact = Contact::Foot;
const T: Contact = Contact::Tibia;
const N: Contact = Contact::None;

pub const STANCE_CONTACTS: [Contact; 4] = [F, F, F, F];
pub const DUAL_CONTACTS: [Contact; 4] = [N, N, T, T];
/// Front feet still down while the body pitches up on the hind tibiae.
pub const PITCHING_CONTACTS: [Contact; 4] = [F, F, T, T];

/// Contacts while moving into keyframe `k` (going up) and while leaving it
/// (coming down).
const KEYFRAME_CONTACTS: [[Contact; 4]; 3] = [STANCE_CONTACTS, PITCHING_CONTACTS, DUAL_CONTACTS];

fn deg(q: [f64; 3]) -> [f64; 3] {
    q.map(f64::to_radians)
}

/// Default four-legged standing pose.
pub fn standing_pose() -> LegJoints<f64> {
    [deg([0.0, -60.0, 120.0]); 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionScript {
    /// Foothold on the hind tibiae; body rotated upward; body repositioned
    /// with the front legs clear.
    pub keyframes: [LegJoints<f64>; 3],
    /// Hold after reaching each keyframe, s.
    pub dwell_s: [f64; 3],
}

impl Default for TransitionScript {
    fn default() -> Self {
        let stand_front = deg([0.0, -60.0, 120.0]);
        // Hind femur vertical, tibia flat on the ground.
        let foothold = deg([0.0, 0.0, 90.0]);
        let pitched_front = deg([0.0, -90.0, 120.0]);
        // Hind femur swung forward by 60°: the body pitches 60° nose-up.
        let pitched_hind = deg([0.0, -60.0, 90.0]);
        let raised_front = deg([0.0, -60.0, 90.0]);
        let raised_hind = deg([0.0, -75.0, 90.0]);
        Self {
            keyframes: [
                [stand_front, stand_front, foothold, foothold],
                [pitched_front, pitched_front, pitched_hind, pitched_hind],
                [raised_front, raised_front, raised_hind, raised_hind],
            ],
            dwell_s: [0.2; 3],
        }
    }
}

/// One step of an expanded script: move to `target` with `contacts`, then
/// hold for `dwell_ticks` with `dwell_contacts`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub target: LegJoints<f64>,
    pub contacts: [Contact; 4],
    pub dwell_ticks: usize,
    pub dwell_contacts: [Contact; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub segments: Vec<Segment>,
    pub final_mode: Mode,
}

impl TransitionScript {
    /// Every keyframe joint must lie inside its range.
    pub fn validate(&self, robot: &RobotModel<f64>) -> dactyl_core::Result<()> {
        for frame in &self.keyframes {
            for (leg, q) in frame.iter().enumerate() {
                robot.legs[leg].check_ranges(q)?;
            }
        }
        if self.dwell_s.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(dactyl_core::Error::Input(
                "dwell times must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn ticks(&self, k: usize, rate: f64) -> usize {
        (self.dwell_s[k] * rate).round() as usize
    }

    pub fn to_dual(&self, rate: f64) -> Script {
        let segments = (0..3)
            .map(|k| Segment {
                target: self.keyframes[k],
                contacts: KEYFRAME_CONTACTS[k],
                dwell_ticks: self.ticks(k, rate),
                dwell_contacts: KEYFRAME_CONTACTS[(k + 1).min(2)],
            })
            .collect();
        Script {
            segments,
            final_mode: Mode::DualLegManip,
        }
    }

    /// `home` is the pose held before the robot went up.
    pub fn to_stance(&self, home: LegJoints<f64>, rate: f64) -> Script {
        let mut segments: Vec<Segment> = (0..3)
            .rev()
            .map(|k| Segment {
                target: self.keyframes[k],
                contacts: KEYFRAME_CONTACTS[(k + 1).min(2)],
                dwell_ticks: self.ticks(k, rate),
                dwell_contacts: KEYFRAME_CONTACTS[k],
            })
            .collect();
        segments.push(Segment {
            target: home,
            contacts: STANCE_CONTACTS,
            dwell_ticks: 0,
            dwell_contacts: STANCE_CONTACTS,
        });
        Script {
            segments,
            final_mode: Mode::Stance,
        }
    }
}
