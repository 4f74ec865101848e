//! Time-synchronised multi-joint moves.
//!
//! Every joint is planned on its own, then all but the slowest are stretched
//! in time so that every joint starts and stops together. Stretching by `σ`
//! divides velocity by `σ`, acceleration by `σ²` and jerk by `σ³`, which
//! keeps each joint's displacement unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{plan, sample_count, sample_n, MotionLimits, PlannedTrajectory};
use crate::scalar::{lit, Real};

/// Durations within this many seconds count as equal when picking the
/// limiting joint.
pub const TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncPlan<T> {
    pub plans: Vec<PlannedTrajectory<T>>,
    pub total_duration: T,
    /// Stretch applied per joint; `None` for joints that do not move.
    pub scale_factors: Vec<Option<T>>,
    /// Index of the slowest joint (`σ = 1`).
    pub limiting_joint: Option<usize>,
}

pub fn plan_synchronized<T: Real>(
    phi_0: &[T],
    phi_1: &[T],
    limits: &MotionLimits<T>,
) -> Result<SyncPlan<T>> {
    if phi_0.is_empty() {
        return Err(Error::Input("joint vector is empty".into()));
    }
    if phi_0.len() != phi_1.len() {
        return Err(Error::Input(format!(
            "start has {} joints, target has {}",
            phi_0.len(),
            phi_1.len()
        )));
    }
    let raw = phi_0
        .iter()
        .zip(phi_1)
        .map(|(&a, &b)| plan(a, b, limits))
        .collect::<Result<Vec<_>>>()?;

    let mut limiting: Option<usize> = None;
    let mut longest = T::zero();
    for (i, p) in raw.iter().enumerate() {
        if p.is_stationary() {
            continue;
        }
        let d = p.total_duration();
        if limiting.is_none() || d > longest + lit(TIE_TOLERANCE) {
            limiting = Some(i);
            longest = d;
        }
    }

    let mut plans = Vec::with_capacity(raw.len());
    let mut scale_factors = Vec::with_capacity(raw.len());
    for (i, p) in raw.into_iter().enumerate() {
        if p.is_stationary() {
            plans.push(p);
            scale_factors.push(None);
        } else if Some(i) == limiting {
            plans.push(p);
            scale_factors.push(Some(T::one()));
        } else {
            let sigma = longest / p.total_duration();
            plans.push(p.time_scaled(sigma));
            scale_factors.push(Some(sigma));
        }
    }
    Ok(SyncPlan {
        plans,
        total_duration: longest,
        scale_factors,
        limiting_joint: limiting,
    })
}

/// Jointly sampled positions, one row per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncSamples<T> {
    pub rate: T,
    pub duration: T,
    pub rows: Vec<Vec<T>>,
}

impl<T: Real> SyncSamples<T> {
    pub fn sample_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn time_at(&self, index: usize) -> T {
        let n = self.sample_count();
        if n < 2 {
            T::zero()
        } else if index + 1 == n {
            self.duration
        } else {
            self.duration * T::from_usize(index).unwrap() / T::from_usize(n - 1).unwrap()
        }
    }

    /// Positions of every joint at sample `index`.
    pub fn column(&self, index: usize) -> Vec<T> {
        self.rows.iter().map(|r| r[index]).collect()
    }
}

pub fn sample_synchronized<T: Real>(sync: &SyncPlan<T>, rate: T) -> Result<SyncSamples<T>> {
    if !rate.is_finite() || rate <= T::zero() {
        return Err(Error::Input(format!("rate must be positive, got {rate}")));
    }
    let n = sample_count(sync.total_duration, rate);
    let rows = sync
        .plans
        .iter()
        .map(|p| sample_n(p, n, rate).positions)
        .collect();
    Ok(SyncSamples {
        rate,
        duration: sync.total_duration,
        rows,
    })
}
