//! Three-joint leg: coxa (abduction about the body x axis), then femur and
//! tibia (pitch about the rotated y axis).
//!
//! Body frame: x forward, y left, z up. At the zero pose the leg hangs
//! straight down from the hip. Positive femur/tibia angles swing the distal
//! link forward; positive coxa swings the foot toward +y.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRange<T> {
    pub min: T,
    pub max: T,
}

impl<T: Real> JointRange<T> {
    /// A range of `span_deg` centred on zero.
    pub fn symmetric_deg(span_deg: T) -> Self {
        let half = (span_deg / lit(2.0)).to_radians();
        Self {
            min: -half,
            max: half,
        }
    }

    pub fn from_deg(min_deg: T, max_deg: T) -> Self {
        Self {
            min: min_deg.to_radians(),
            max: max_deg.to_radians(),
        }
    }

    pub fn contains(&self, q: T) -> bool {
        q >= self.min && q <= self.max
    }

    pub fn clamp(&self, q: T) -> T {
        q.max(self.min).min(self.max)
    }

    pub fn check(&self, joint: usize, q: T) -> Result<()> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(Error::Range {
                joint,
                value: q.to_f64_lossy(),
                min: self.min.to_f64_lossy(),
                max: self.max.to_f64_lossy(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegModel<T> {
    /// m
    pub femur_length: T,
    /// m
    pub tibia_length: T,
    pub coxa_range: JointRange<T>,
    pub femur_range: JointRange<T>,
    pub tibia_range: JointRange<T>,
    /// Hip position in the body frame, m.
    pub hip_offset: Vec3<T>,
}

impl<T: Real> LegModel<T> {
    /// 100 mm femur and tibia; 200° coxa, 300° femur and tibia.
    pub fn standard(hip_offset: Vec3<T>) -> Self {
        Self {
            femur_length: lit(0.100),
            tibia_length: lit(0.100),
            coxa_range: JointRange::symmetric_deg(lit(200.0)),
            femur_range: JointRange::symmetric_deg(lit(300.0)),
            tibia_range: JointRange::symmetric_deg(lit(300.0)),
            hip_offset,
        }
    }

    pub fn reach(&self) -> T {
        self.femur_length + self.tibia_length
    }

    pub fn min_reach(&self) -> T {
        (self.femur_length - self.tibia_length).abs()
    }

    pub fn ranges(&self) -> [JointRange<T>; 3] {
        [self.coxa_range, self.femur_range, self.tibia_range]
    }

    pub fn check_ranges(&self, q: &Vec3<T>) -> Result<()> {
        for (i, (range, &v)) in self.ranges().iter().zip(q).enumerate() {
            range.check(i, v)?;
        }
        Ok(())
    }
}

/// Hip, knee and foot of one leg in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPoints<T> {
    pub hip: Vec3<T>,
    pub knee: Vec3<T>,
    pub foot: Vec3<T>,
}

/// Rotates a point of the leg's sagittal plane (`y = 0`) by the coxa angle.
fn coxa_rotate<T: Real>(x: T, z: T, coxa: T) -> Vec3<T> {
    let (s, c) = coxa.sin_cos();
    [x, -z * s, z * c]
}

fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Chain points for any joint values, without range checks.
pub fn leg_points<T: Real>(q: &Vec3<T>, model: &LegModel<T>) -> LegPoints<T> {
    let [coxa, femur, tibia] = *q;
    let (s1, c1) = femur.sin_cos();
    let (s12, c12) = (femur + tibia).sin_cos();
    let knee_x = model.femur_length * s1;
    let knee_z = -model.femur_length * c1;
    let foot_x = knee_x + model.tibia_length * s12;
    let foot_z = knee_z - model.tibia_length * c12;
    let hip = model.hip_offset;
    LegPoints {
        hip,
        knee: add(hip, coxa_rotate(knee_x, knee_z, coxa)),
        foot: add(hip, coxa_rotate(foot_x, foot_z, coxa)),
    }
}

/// Foot position in the body frame.
pub fn fk_leg<T: Real>(q: &Vec3<T>, model: &LegModel<T>) -> Result<Vec3<T>> {
    model.check_ranges(q)?;
    Ok(leg_points(q, model).foot)
}

/// Joint angles placing the foot at `target` (body frame), knee-backward
/// branch: the knee sits behind the hip–foot line and the tibia angle is
/// non-negative.
pub fn ik_leg<T: Real>(target: &Vec3<T>, model: &LegModel<T>) -> Result<Vec3<T>> {
    let x = target[0] - model.hip_offset[0];
    let y = target[1] - model.hip_offset[1];
    let z = target[2] - model.hip_offset[2];
    let distance = (x * x + y * y + z * z).sqrt();
    let eps = lit::<T>(1e-12);
    let (l1, l2) = (model.femur_length, model.tibia_length);
    if !distance.is_finite() || distance > model.reach() + eps || distance < model.min_reach() - eps
    {
        return Err(Error::Unreachable {
            distance: distance.to_f64_lossy(),
            min: model.min_reach().to_f64_lossy(),
            max: model.reach().to_f64_lossy(),
        });
    }
    let r = (y * y + z * z).sqrt();
    let coxa = y.atan2(-z);
    let cos_tibia = ((distance * distance - l1 * l1 - l2 * l2) / (lit::<T>(2.0) * l1 * l2))
        .max(-T::one())
        .min(T::one());
    let tibia = cos_tibia.acos();
    let femur = x.atan2(r) - (l2 * tibia.sin()).atan2(l1 + l2 * tibia.cos());
    let q = [coxa, femur, tibia];
    model.check_ranges(&q)?;
    Ok(q)
}
