//! The dactylus: a two-link finger hinged near the tibia tip, closing against
//! the tibia (the static propodus), plus a wrist rotating about the tibia
//! axis.
//!
//! Coordinates are in a tibia-tip frame: `u` along the tibia toward its tip,
//! with the hinge at the origin and the propodus contact line on `v = 0`.
//! Base and tip angles measure flexion from the fully open pose; at full
//! flexion both links lie flat along the propodus.

use serde::{Deserialize, Serialize};

use super::leg::{JointRange, Vec3};
use crate::error::Result;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DactylusModel<T> {
    pub base_length: T,
    pub tip_length: T,
    pub wrist_range: JointRange<T>,
    pub base_range: JointRange<T>,
    pub tip_range: JointRange<T>,
}

impl<T: Real> Default for DactylusModel<T> {
    fn default() -> Self {
        Self {
            base_length: lit(0.030),
            tip_length: lit(0.025),
            wrist_range: JointRange::symmetric_deg(lit(180.0)),
            base_range: JointRange::from_deg(T::zero(), lit(60.0)),
            tip_range: JointRange::from_deg(T::zero(), lit(30.0)),
        }
    }
}

impl<T: Real> DactylusModel<T> {
    pub fn ranges(&self) -> [JointRange<T>; 3] {
        [self.wrist_range, self.base_range, self.tip_range]
    }

    pub fn fully_open(&self) -> Vec3<T> {
        [T::zero(), self.base_range.min, self.tip_range.min]
    }

    pub fn fully_closed(&self) -> Vec3<T> {
        [T::zero(), self.base_range.max, self.tip_range.max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DactylusPose<T> {
    /// Fingertip in the tibia-tip frame, m.
    pub fingertip: Vec3<T>,
    /// Distance from the fingertip to the propodus line, m.
    pub aperture: T,
}

fn planar<T: Real>(base: T, tip: T, model: &DactylusModel<T>) -> (T, T) {
    let open_base = model.base_range.max - base;
    let open_tip = model.tip_range.max - tip;
    let u = model.base_length * open_base.cos() + model.tip_length * (open_base + open_tip).cos();
    let v = model.base_length * open_base.sin() + model.tip_length * (open_base + open_tip).sin();
    (u, v)
}

/// `q_d = [wrist, base, tip]`.
pub fn dactylus_aperture<T: Real>(
    q_d: &Vec3<T>,
    model: &DactylusModel<T>,
) -> Result<DactylusPose<T>> {
    for (i, (range, &v)) in model.ranges().iter().zip(q_d).enumerate() {
        range.check(i, v)?;
    }
    let (u, v) = planar(q_d[1], q_d[2], model);
    let (s, c) = q_d[0].sin_cos();
    Ok(DactylusPose {
        fingertip: [u, v * c, v * s],
        aperture: v,
    })
}

/// Base flexion at which the aperture equals `aperture` for a fixed tip
/// angle, or `None` if the object is wider than the open hand.
pub fn base_angle_for_aperture<T: Real>(
    aperture: T,
    tip: T,
    model: &DactylusModel<T>,
) -> Option<T> {
    let open = planar(model.base_range.min, tip, model).1;
    if aperture > open {
        return None;
    }
    let (mut lo, mut hi) = (model.base_range.min, model.base_range.max);
    if planar(hi, tip, model).1 >= aperture {
        return Some(hi);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if planar(mid, tip, model).1 > aperture {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / lit(2.0))
}
