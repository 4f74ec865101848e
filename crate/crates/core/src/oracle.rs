//! Numerical cross-check for planned trajectories.
//!
//! Rebuilds the full 15-phase jerk signal directly from a plan's durations
//! and integrates it cumulatively on a fine grid. Nothing here goes through
//! the closed-form evaluation or the mirroring used by [`crate::profile`].

use crate::profile::{MotionLimits, PlannedTrajectory, SampledTrajectory, TrajectoryType};
use crate::scalar::{lit, Real};

/// Integration rate used for verification, Hz.
pub const ORACLE_RATE: f64 = 100_000.0;

/// Linear jerk segment: `(duration, jerk at start, jerk at end)`.
type Segment<T> = (T, T, T);

/// The unsigned jerk signal of `plan` as 15 linear segments.
pub fn jerk_segments<T: Real>(plan: &PlannedTrajectory<T>) -> Vec<Segment<T>> {
    let j = plan.j_peak;
    let z = T::zero();
    vec![
        (plan.t1, z, j),
        (plan.t2, j, j),
        (plan.t1, j, z),
        (plan.t3, z, z),
        (plan.t1, z, -j),
        (plan.t2, -j, -j),
        (plan.t1, -j, z),
        (plan.t4, z, z),
        (plan.t1, z, -j),
        (plan.t2, -j, -j),
        (plan.t1, -j, z),
        (plan.t3, z, z),
        (plan.t1, z, j),
        (plan.t2, j, j),
        (plan.t1, j, z),
    ]
}

/// Cumulatively integrated trajectory on a uniform grid.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub step: T,
    pub jerk: Vec<T>,
    pub acceleration: Vec<T>,
    pub velocity: Vec<T>,
    pub position: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub fn duration(&self) -> T {
        self.step * T::from_usize(self.position.len().saturating_sub(1)).unwrap()
    }

    /// Linear interpolation of position at `t`.
    pub fn position_at(&self, t: T) -> T {
        let n = self.position.len();
        if n == 1 || self.step == T::zero() {
            return self.position[0];
        }
        let x = (t / self.step).max(T::zero());
        let i = x.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = (x - T::from_usize(i).unwrap()).min(T::one());
        self.position[i] + (self.position[i + 1] - self.position[i]) * frac
    }

    pub fn peak_velocity(&self) -> T {
        self.velocity.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn peak_acceleration(&self) -> T {
        self.acceleration
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn peak_jerk(&self) -> T {
        self.jerk.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Type implied by which bounds the integrated profile touches, with a
    /// relative tolerance `rel`.
    pub fn observed_type(&self, limits: &MotionLimits<T>, rel: T) -> TrajectoryType {
        let hit = |peak: T, bound: T| peak >= bound * (T::one() - rel);
        TrajectoryType::from_reached(
            hit(self.peak_acceleration(), limits.a_max),
            hit(self.peak_velocity(), limits.v_max),
        )
    }
}

/// Integrates the jerk signal of `plan` at `rate` Hz using the cumulative
/// trapezoid rule for acceleration, velocity and position.
pub fn integrate<T: Real>(plan: &PlannedTrajectory<T>, rate: T) -> Trace<T> {
    let total = plan.total_duration();
    let step = T::one() / rate;
    let n = (total / step).ceil().to_usize().unwrap_or(0) + 1;
    let segments = jerk_segments(plan);
    let dir = plan.direction;

    let mut jerk = Vec::with_capacity(n);
    let mut seg = 0usize;
    let mut seg_start = T::zero();
    for i in 0..n {
        let t = (step * T::from_usize(i).unwrap()).min(total);
        while seg < segments.len() && t > seg_start + segments[seg].0 {
            seg_start = seg_start + segments[seg].0;
            seg += 1;
        }
        let value = if seg >= segments.len() {
            T::zero()
        } else {
            let (dur, j0, j1) = segments[seg];
            if dur > T::zero() {
                j0 + (j1 - j0) * ((t - seg_start) / dur)
            } else {
                j1
            }
        };
        jerk.push(dir * value);
    }

    let half = step / lit(2.0);
    let cumulative = |src: &[T], start: T| {
        let mut out = Vec::with_capacity(src.len());
        let mut acc = start;
        out.push(acc);
        for w in src.windows(2) {
            acc = acc + half * (w[0] + w[1]);
            out.push(acc);
        }
        out
    };
    let acceleration = cumulative(&jerk, T::zero());
    let velocity = cumulative(&acceleration, T::zero());
    let position = cumulative(&velocity, plan.phi_0);
    Trace {
        step,
        jerk,
        acceleration,
        velocity,
        position,
    }
}

/// Largest deviation between sampled positions and the oracle trace.
pub fn max_sample_error<T: Real>(samples: &SampledTrajectory<T>, trace: &Trace<T>) -> T {
    samples
        .times()
        .zip(&samples.positions)
        .fold(T::zero(), |m, (t, &p)| {
            m.max((trace.position_at(t) - p).abs())
        })
}

/// Finite-difference peaks `(|v|, |a|, |j|)` of a uniformly spaced series.
pub fn finite_difference_peaks<T: Real>(positions: &[T], step: T) -> (T, T, T) {
    let mut v = T::zero();
    let mut a = T::zero();
    let mut j = T::zero();
    if step <= T::zero() {
        return (v, a, j);
    }
    let d1: Vec<T> = positions.windows(2).map(|w| (w[1] - w[0]) / step).collect();
    let d2: Vec<T> = d1.windows(2).map(|w| (w[1] - w[0]) / step).collect();
    let d3: Vec<T> = d2.windows(2).map(|w| (w[1] - w[0]) / step).collect();
    for x in &d1 {
        v = v.max(x.abs());
    }
    for x in &d2 {
        a = a.max(x.abs());
    }
    for x in &d3 {
        j = j.max(x.abs());
    }
    (v, a, j)
}

/// Outcome of [`verify_samples`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub max_oracle_error: f64,
    pub terminal_error: f64,
    pub symmetry_residual: f64,
    pub peak_velocity: f64,
    pub peak_acceleration: f64,
    pub peak_jerk: f64,
}

impl Verification {
    /// Applies the standard acceptance tolerances against `limits`.
    pub fn passes<T: Real>(&self, limits: &MotionLimits<T>) -> bool {
        self.max_oracle_error <= 1e-4
            && self.terminal_error <= 1e-3
            && self.symmetry_residual <= 1e-9
            && self.peak_velocity <= limits.v_max.to_f64_lossy() * 1.005
            && self.peak_acceleration <= limits.a_max.to_f64_lossy() * 1.01
            && self.peak_jerk <= limits.j_max.to_f64_lossy() * 1.02
    }
}

/// Checks a sampled series against its plan with the integration oracle.
pub fn verify_samples<T: Real>(
    plan: &PlannedTrajectory<T>,
    samples: &SampledTrajectory<T>,
) -> Verification {
    let trace = integrate(plan, lit(ORACLE_RATE));
    let n = samples.positions.len();
    let sum = plan.phi_0 + plan.phi_1;
    let symmetry = (0..n).fold(T::zero(), |m, k| {
        m.max((samples.positions[k] + samples.positions[n - 1 - k] - sum).abs())
    });
    let (v, a, j) = finite_difference_peaks(&samples.positions, samples.step());
    let terminal = (*trace.position.last().unwrap() - plan.phi_1)
        .abs()
        .max((samples.positions[n - 1] - plan.phi_1).abs());
    Verification {
        max_oracle_error: max_sample_error(samples, &trace).to_f64_lossy(),
        terminal_error: terminal.to_f64_lossy(),
        symmetry_residual: symmetry.to_f64_lossy(),
        peak_velocity: v.to_f64_lossy(),
        peak_acceleration: a.to_f64_lossy(),
        peak_jerk: j.to_f64_lossy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{plan, sample};

    #[test]
    fn oracle_lands_on_target() {
        let limits = MotionLimits::<f64>::servo_defaults();
        let p = plan(0.0, 2.0, &limits).unwrap();
        let trace = integrate(&p, ORACLE_RATE);
        assert!((trace.position.last().unwrap() - 2.0).abs() < 1e-4);
        assert!(trace.velocity.last().unwrap().abs() < 1e-6);
    }

    #[test]
    fn verification_of_servo_move() {
        let limits = MotionLimits::<f64>::servo_defaults();
        let p = plan(0.0, 2.0, &limits).unwrap();
        let s = sample(&p, 1000.0).unwrap();
        let v = verify_samples(&p, &s);
        assert!(v.passes(&limits), "{v:?}");
    }

    #[test]
    fn finite_differences_of_a_cubic() {
        let step = 0.5;
        let xs: Vec<f64> = (0..6).map(|i| (i as f64 * step).powi(3)).collect();
        let (_, _, j) = finite_difference_peaks(&xs, step);
        assert!((j - 6.0).abs() < 1e-9);
    }
}
