//! Whole-robot geometry: hip layout, lumped-mass centre of mass, ground
//! contacts and the static stability margin.
//!
//! Legs are indexed front-left, front-right, hind-left, hind-right. The two
//! front legs carry the dactyli.

use serde::{Deserialize, Serialize};

use super::dactylus::DactylusModel;
use super::leg::{leg_points, LegModel, LegPoints, Vec3};
use super::mass::MassModel;
use super::support::{self, Point2};
use crate::error::Result;
use crate::scalar::{lit, Real};

pub const LEG_COUNT: usize = 4;
pub const FRONT_LEFT: usize = 0;
pub const FRONT_RIGHT: usize = 1;
pub const HIND_LEFT: usize = 2;
pub const HIND_RIGHT: usize = 3;

pub fn is_front(leg: usize) -> bool {
    leg < 2
}

pub fn is_hind(leg: usize) -> bool {
    (2..4).contains(&leg)
}

/// Leg joints of the whole robot, one `[coxa, femur, tibia]` per leg.
pub type LegJoints<T> = [Vec3<T>; LEG_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    /// Only the foot touches the ground.
    Foot,
    /// The whole tibia lies on the ground (knee to foot).
    Tibia,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceConfig<T> {
    pub contacts: [Contact; LEG_COUNT],
    pub joints: LegJoints<T>,
}

impl<T: Real> StanceConfig<T> {
    /// Dual-leg manipulation stands on both hind tibiae.
    pub fn is_hind_tibia_stance(&self) -> bool {
        self.contacts[HIND_LEFT] == Contact::Tibia && self.contacts[HIND_RIGHT] == Contact::Tibia
    }
}

/// Body box, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyModel<T> {
    pub length_mm: T,
    pub width_mm: T,
    pub height_mm: T,
    /// Hips sit at the body corners moved inward by this much, mm.
    pub hip_inset_mm: T,
}

impl<T: Real> Default for BodyModel<T> {
    fn default() -> Self {
        Self {
            length_mm: lit(253.0),
            width_mm: lit(118.0),
            height_mm: lit(56.0),
            hip_inset_mm: lit(15.0),
        }
    }
}

impl<T: Real> BodyModel<T> {
    pub fn hip_offsets(&self) -> [Vec3<T>; LEG_COUNT] {
        let mm = lit::<T>(1e-3);
        let x = (self.length_mm / lit(2.0) - self.hip_inset_mm) * mm;
        let y = (self.width_mm / lit(2.0) - self.hip_inset_mm) * mm;
        let z = T::zero();
        [[x, y, z], [x, -y, z], [-x, y, z], [-x, -y, z]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel<T> {
    pub body: BodyModel<T>,
    pub legs: [LegModel<T>; LEG_COUNT],
    pub dactylus: DactylusModel<T>,
    pub mass: MassModel<T>,
    /// Share of a dactylus leg's mass lumped at the femur midpoint; the rest
    /// sits at the tibia midpoint.
    pub femur_fraction_dact: T,
    pub femur_fraction_plain: T,
}

impl<T: Real> Default for RobotModel<T> {
    fn default() -> Self {
        Self::from_parts(
            BodyModel::default(),
            lit(0.1),
            lit(0.1),
            MassModel::catalogue(),
        )
    }
}

impl<T: Real> RobotModel<T> {
    pub fn from_parts(
        body: BodyModel<T>,
        femur_length: T,
        tibia_length: T,
        mass: MassModel<T>,
    ) -> Self {
        let legs = body.hip_offsets().map(|hip| LegModel {
            femur_length,
            tibia_length,
            ..LegModel::standard(hip)
        });
        Self {
            body,
            legs,
            dactylus: DactylusModel::default(),
            mass,
            femur_fraction_dact: lit(0.4),
            femur_fraction_plain: lit(0.5),
        }
    }

    pub fn leg_mass(&self, leg: usize) -> T {
        if is_front(leg) {
            self.mass.leg_with_dact
        } else {
            self.mass.leg_no_dact
        }
    }

    /// Sum of the lumped masses, g.
    pub fn total_mass(&self) -> T {
        self.mass.body
            + (0..LEG_COUNT)
                .map(|i| self.leg_mass(i))
                .fold(T::zero(), |a, b| a + b)
    }

    pub fn leg_points(&self, joints: &LegJoints<T>) -> [LegPoints<T>; LEG_COUNT] {
        std::array::from_fn(|i| leg_points(&joints[i], &self.legs[i]))
    }

    /// Centre of mass in the body frame. The body mass sits at the body
    /// centroid (the origin); each leg's mass is split between its femur and
    /// tibia midpoints.
    pub fn center_of_mass(&self, joints: &LegJoints<T>) -> Vec3<T> {
        let half = lit::<T>(0.5);
        let mut moment = [T::zero(); 3];
        let mut total = self.mass.body;
        for (i, pts) in self.leg_points(joints).iter().enumerate() {
            let m = self.leg_mass(i);
            let f = if is_front(i) {
                self.femur_fraction_dact
            } else {
                self.femur_fraction_plain
            };
            for k in 0..3 {
                let femur_mid = (pts.hip[k] + pts.knee[k]) * half;
                let tibia_mid = (pts.knee[k] + pts.foot[k]) * half;
                moment[k] = moment[k] + m * (f * femur_mid + (T::one() - f) * tibia_mid);
            }
            total = total + m;
        }
        if total == T::zero() {
            return [T::zero(); 3];
        }
        moment.map(|x| x / total)
    }

    /// Nose-up body pitch implied by the stance. When the hind tibiae are
    /// on the ground the body is tilted so that they lie flat; otherwise the
    /// body is level.
    pub fn body_pitch(&self, stance: &StanceConfig<T>) -> T {
        let pts = self.leg_points(&stance.joints);
        let mut sum = T::zero();
        let mut count = 0usize;
        for leg in [HIND_LEFT, HIND_RIGHT] {
            if stance.contacts[leg] != Contact::Tibia {
                continue;
            }
            let ux = pts[leg].foot[0] - pts[leg].knee[0];
            let uz = pts[leg].foot[2] - pts[leg].knee[2];
            let pitch = if ux == T::zero() {
                T::FRAC_PI_2().copysign(-uz)
            } else {
                (-uz / ux).atan()
            };
            sum = sum + pitch;
            count += 1;
        }
        if count == 0 {
            T::zero()
        } else {
            sum / T::from_usize(count).unwrap()
        }
    }

    /// Ground-plane projections of every contact point, world frame.
    pub fn support_points(&self, stance: &StanceConfig<T>) -> Vec<Point2<T>> {
        let pitch = self.body_pitch(stance);
        let pts = self.leg_points(&stance.joints);
        let mut out = Vec::with_capacity(8);
        for (leg, contact) in stance.contacts.iter().enumerate() {
            match contact {
                Contact::Foot => out.push(project(pts[leg].foot, pitch)),
                Contact::Tibia => {
                    out.push(project(pts[leg].knee, pitch));
                    out.push(project(pts[leg].foot, pitch));
                }
                Contact::None => {}
            }
        }
        out
    }

    /// Ground projection of the centre of mass, world frame.
    pub fn com_ground(&self, stance: &StanceConfig<T>) -> Point2<T> {
        project(self.center_of_mass(&stance.joints), self.body_pitch(stance))
    }

    /// Signed distance of the projected centre of mass to the support
    /// polygon boundary (positive inside), m.
    pub fn stability_margin(&self, stance: &StanceConfig<T>) -> Result<T> {
        support::stability_margin(&self.support_points(stance), self.com_ground(stance))
    }
}

/// Rotates a body-frame point by the nose-up pitch and drops the height.
pub fn project<T: Real>(p: Vec3<T>, pitch: T) -> Point2<T> {
    let (s, c) = pitch.sin_cos();
    [p[0] * c - p[2] * s, p[1]]
}

/// Body-frame point expressed in the world frame (no translation).
pub fn to_world<T: Real>(p: Vec3<T>, pitch: T) -> Vec3<T> {
    let (s, c) = pitch.sin_cos();
    [p[0] * c - p[2] * s, p[1], p[0] * s + p[2] * c]
}
