use serde::{Deserialize, Serialize};

use dactyl_core::kinematics::robot::LegJoints;
use dactyl_core::profile::{MotionLimits, DEFAULT_RATE};
use dactyl_core::tendon::{TendonParams, TendonPreset};

use crate::script::{standing_pose, TransitionScript};

/// An object placed between a dactylus and its propodus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub dactylus: usize,
    /// Width of the object at the grasp point, m.
    pub size_m: f64,
    /// Minimum grip force for the object to count as held, N.
    pub hold_threshold_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub rate_hz: f64,
    pub j_max: f64,
    pub a_max: f64,
    pub v_max: f64,
    /// Defaults to ten times `j_max`.
    pub s_max: Option<f64>,
    pub tendon: TendonPreset,
    /// A cable cannot push: clamp a negative tendon term to zero. Off gives
    /// the bare linear force law.
    pub tendon_slack: bool,
    pub grip_slew_rad_s: f64,
    pub grip_tolerance_n: f64,
    pub warning_margin_m: f64,
    pub telemetry_period_ms: u64,
    pub transition: TransitionScript,
    /// Leg pose at start-up, degrees; the standing pose if absent.
    pub initial_pose_deg: Option<[[f64; 3]; 4]>,
    pub objects: Vec<ObjectSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        let limits = MotionLimits::<f64>::servo_defaults();
        Self {
            rate_hz: DEFAULT_RATE,
            j_max: limits.j_max,
            a_max: limits.a_max,
            v_max: limits.v_max,
            s_max: None,
            tendon: TendonPreset::Monofilament,
            tendon_slack: true,
            grip_slew_rad_s: 3.0,
            grip_tolerance_n: 1e-3,
            warning_margin_m: 0.005,
            telemetry_period_ms: 20,
            transition: TransitionScript::default(),
            initial_pose_deg: None,
            objects: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn motion_limits(&self) -> dactyl_core::Result<MotionLimits<f64>> {
        match self.s_max {
            Some(s) => MotionLimits::with_snap(self.j_max, self.a_max, self.v_max, s),
            None => MotionLimits::new(self.j_max, self.a_max, self.v_max),
        }
    }

    pub fn tendon_params(&self) -> TendonParams<f64> {
        TendonParams::preset(self.tendon)
    }

    pub fn initial_pose(&self) -> LegJoints<f64> {
        self.initial_pose_deg
            .map(|legs| legs.map(|q| q.map(f64::to_radians)))
            .unwrap_or_else(standing_pose)
    }
}
