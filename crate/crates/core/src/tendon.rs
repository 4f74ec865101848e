//! Cable, winch and spiral-spring compliance of a dactylus joint.
//!
//! A tendon wound on a servo winch (radius `r_1`) pulls the joint winch
//! (radius `r_2`) against a torsion spring. With the servo and joint
//! deflected by `alpha_1` and `alpha_2` the reaction force on a held object
//! is
//!
//! ```text
//! N = k_t (r_1 α_1 − r_2 α_2) − k_s r_2 α_2
//! ```
//!
//! Both stiffnesses are linear and referred to the winch tangent (N/m), so
//! `N` is in newtons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::JointRange;
use crate::scalar::{lit, Real};

/// Peak spring stress as a fraction of PLA yield stress. Recorded for
/// reference only; spring geometry is not synthesised here.
pub const SPRING_STRESS_FACTOR: f64 = 0.65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TendonParams<T> {
    /// Tendon stiffness, N/m.
    pub k_t: T,
    /// Spring stiffness referred to the joint winch, N/m.
    pub k_s: T,
    /// Servo winch radius, m.
    pub r_1: T,
    /// Dactylus winch radius, m.
    pub r_2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TendonPreset {
    /// Braided line: nearly inextensible, used for position-only tasks.
    Braided,
    /// Monofilament line: compliant enough to regulate grip force.
    Monofilament,
}

impl<T: Real> TendonParams<T> {
    pub fn preset(preset: TendonPreset) -> Self {
        let k_t = match preset {
            TendonPreset::Braided => 50_000.0,
            TendonPreset::Monofilament => 2_000.0,
        };
        Self {
            k_t: lit(k_t),
            k_s: lit(200.0),
            r_1: lit(0.006),
            r_2: lit(0.004),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_t", self.k_t),
            ("k_s", self.k_s),
            ("r_1", self.r_1),
            ("r_2", self.r_2),
        ] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn joint(&self, alpha_1: T, alpha_2: T) -> TendonJoint<T> {
        TendonJoint {
            params: *self,
            alpha_1,
            alpha_2,
        }
    }

    /// Joint deflection at which the tendon and spring balance with nothing
    /// in the way (`N = 0`).
    pub fn free_deflection(&self, alpha_1: T) -> T {
        self.k_t * self.r_1 * alpha_1 / ((self.k_t + self.k_s) * self.r_2)
    }
}

impl<T: Real> Default for TendonParams<T> {
    fn default() -> Self {
        Self::preset(TendonPreset::Monofilament)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TendonJoint<T> {
    pub params: TendonParams<T>,
    /// Servo deflection, rad.
    pub alpha_1: T,
    /// Joint deflection measured by the encoder, rad.
    pub alpha_2: T,
}

/// Reaction force, exactly as the equation gives it.
pub fn joint_force<T: Real>(j: &TendonJoint<T>) -> T {
    let p = &j.params;
    p.k_t * (p.r_1 * j.alpha_1 - p.r_2 * j.alpha_2) - p.k_s * p.r_2 * j.alpha_2
}

/// Reaction force with a slack tendon: a cable cannot push, so a negative
/// tendon term contributes nothing.
pub fn slack_joint_force<T: Real>(j: &TendonJoint<T>) -> T {
    let p = &j.params;
    let tendon = (p.k_t * (p.r_1 * j.alpha_1 - p.r_2 * j.alpha_2)).max(T::zero());
    tendon - p.k_s * p.r_2 * j.alpha_2
}

/// Servo deflection producing `target` newtons at the current joint
/// deflection. Fails when that deflection lies outside `servo_range`; the
/// error carries the force the nearest reachable angle would give.
pub fn servo_angle_for_force<T: Real>(
    target: T,
    j: &TendonJoint<T>,
    servo_range: &JointRange<T>,
) -> Result<T> {
    let p = &j.params;
    let alpha_1 =
        (target + p.k_t * p.r_2 * j.alpha_2 + p.k_s * p.r_2 * j.alpha_2) / (p.k_t * p.r_1);
    if servo_range.contains(alpha_1) {
        Ok(alpha_1)
    } else {
        let clamped = servo_range.clamp(alpha_1);
        let achievable = joint_force(&TendonJoint {
            alpha_1: clamped,
            ..*j
        });
        Err(Error::ActuationLimit {
            requested: alpha_1.to_f64_lossy(),
            clamped: clamped.to_f64_lossy(),
            achievable_force: achievable.to_f64_lossy(),
        })
    }
}

/// Moves the servo toward the angle that yields `target`, by at most
/// `slew * dt` per call.
pub fn grip_step<T: Real>(
    j: &TendonJoint<T>,
    target: T,
    dt: T,
    slew: T,
    servo_range: &JointRange<T>,
) -> Result<T> {
    if !(slew > T::zero()) || !(dt >= T::zero()) {
        return Err(Error::Input(
            "slew must be positive and dt non-negative".into(),
        ));
    }
    let goal = servo_angle_for_force(target, j, servo_range)?;
    let max_step = slew * dt;
    let delta = (goal - j.alpha_1).max(-max_step).min(max_step);
    Ok(j.alpha_1 + delta)
}

/// Servo range of the micro servos driving the tendons.
pub fn micro_servo_range<T: Real>() -> JointRange<T> {
    JointRange::from_deg(lit(-90.0), lit(90.0))
}
