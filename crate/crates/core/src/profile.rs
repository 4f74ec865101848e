//! Single-joint, rest-to-rest, jerk-limited trajectories.
//!
//! The jerk signal is trapezoidal: it ramps at constant snap for `t1`, holds
//! its peak for `t2`, and ramps back down for `t1`. One such hump raises the
//! acceleration, which may then hold `a_max` for `t3`; a mirrored hump brings
//! it back to zero. The velocity then cruises for `t4` and the deceleration
//! half mirrors the acceleration half, giving 15 phases in total:
//!
//! ```text
//! jerk  ┌─┐       accel half (7)      cruise     decel half (7)
//!      /   \  t3                       t4
//!  ───/     \────────\     /─────────────────────\     /──── ...
//!                     \___/                       \___/
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Sampling rate used by the servo controller, samples per second.
pub const DEFAULT_RATE: f64 = 1000.0;

/// Ratio of snap bound to jerk bound when none is given.
pub const DEFAULT_SNAP_RATIO: f64 = 10.0;

/// Tolerance on `|last sample - phi_1|` before the endpoint is snapped.
pub const TERMINAL_TOLERANCE: f64 = 1e-3;

/// Kinematic bounds for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionLimits<T> {
    /// Jerk bound, rad/s³.
    pub j_max: T,
    /// Acceleration bound, rad/s².
    pub a_max: T,
    /// Velocity bound, rad/s.
    pub v_max: T,
    /// Snap bound (slope of the jerk ramps), rad/s⁴.
    pub s_max: T,
}

impl<T: Real> MotionLimits<T> {
    /// Limits with the default snap bound of `10 * j_max`.
    pub fn new(j_max: T, a_max: T, v_max: T) -> Result<Self> {
        Self::with_snap(j_max, a_max, v_max, j_max * lit(DEFAULT_SNAP_RATIO))
    }

    pub fn with_snap(j_max: T, a_max: T, v_max: T, s_max: T) -> Result<Self> {
        let limits = Self {
            j_max,
            a_max,
            v_max,
            s_max,
        };
        limits.validate()?;
        Ok(limits)
    }

    /// Bounds used on the physical servos: J = 15 rad/s³, A = 15 rad/s²,
    /// V = 5.2 rad/s (the servo's top speed).
    pub fn servo_defaults() -> Self {
        Self::new(lit(15.0), lit(15.0), lit(5.2)).expect("default limits are valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("j_max", self.j_max),
            ("a_max", self.a_max),
            ("v_max", self.v_max),
            ("s_max", self.s_max),
        ] {
            if !value.is_finite() || value <= T::zero() {
                return Err(Error::Input(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Highest jerk the profile may use. When the jerk ramp alone would
    /// overshoot `a_max` (`j_max²/s_max > a_max`) the peak jerk is lowered to
    /// `sqrt(a_max * s_max)` so that `t2` never goes negative.
    pub fn jerk_cap(&self) -> T {
        self.j_max.min((self.a_max * self.s_max).sqrt())
    }

    /// Duration of a full jerk ramp at the jerk cap.
    pub fn ramp_time(&self) -> T {
        self.jerk_cap() / self.s_max
    }

    /// Returns these limits as seen by a trajectory stretched in time by
    /// `factor`: velocity scales by `1/factor`, acceleration `1/factor²`,
    /// jerk `1/factor³`, snap `1/factor⁴`.
    pub fn dilated(&self, factor: T) -> Self {
        let f2 = factor * factor;
        Self {
            j_max: self.j_max / (f2 * factor),
            a_max: self.a_max / f2,
            v_max: self.v_max / factor,
            s_max: self.s_max / (f2 * f2),
        }
    }
}

impl<T: Real> Default for MotionLimits<T> {
    fn default() -> Self {
        Self::servo_defaults()
    }
}

/// Which bounds a trajectory actually attains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrajectoryType {
    /// Both `a_max` and `v_max` are held for a positive time.
    Full,
    AccOnly,
    VelOnly,
    Neither,
}

impl TrajectoryType {
    pub fn reaches_acceleration(self) -> bool {
        matches!(self, Self::Full | Self::AccOnly)
    }

    pub fn reaches_velocity(self) -> bool {
        matches!(self, Self::Full | Self::VelOnly)
    }

    pub fn from_reached(acceleration: bool, velocity: bool) -> Self {
        match (acceleration, velocity) {
            (true, true) => Self::Full,
            (true, false) => Self::AccOnly,
            (false, true) => Self::VelOnly,
            (false, false) => Self::Neither,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Full => "FULL",
            Self::AccOnly => "ACC_ONLY",
            Self::VelOnly => "VEL_ONLY",
            Self::Neither => "NEITHER",
        }
    }
}

impl std::fmt::Display for TrajectoryType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference values that decide the trajectory type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<T> {
    /// Smallest velocity change whose acceleration hump plateaus at `a_max`.
    pub v_aref: T,
    /// Smallest rest-to-rest displacement that reaches `a_max`.
    pub d_aref: T,
    /// Smallest rest-to-rest displacement that reaches `v_max`.
    pub d_vref: T,
}

/// Durations of one acceleration half, before the cruise.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Hump<T> {
    t1: T,
    t2: T,
    t3: T,
    jerk: T,
}

impl<T: Real> Hump<T> {
    fn zero() -> Self {
        Self {
            t1: T::zero(),
            t2: T::zero(),
            t3: T::zero(),
            jerk: T::zero(),
        }
    }

    fn peak_acceleration(&self) -> T {
        self.jerk * (self.t1 + self.t2)
    }

    fn peak_velocity(&self) -> T {
        self.peak_acceleration() * (lit::<T>(2.0) * self.t1 + self.t2 + self.t3)
    }

    fn duration(&self) -> T {
        lit::<T>(4.0) * self.t1 + lit::<T>(2.0) * self.t2 + self.t3
    }

    /// Rest-to-rest displacement when the peak velocity is not held. The
    /// velocity curve of a half is point-symmetric about its midpoint, so the
    /// half covers `v_peak * duration / 2`.
    fn distance(&self) -> T {
        self.peak_velocity() * self.duration()
    }

    /// The hump that raises velocity from rest to `v`, shrinking `t3`, then
    /// `t2`, then the jerk peak as `v` decreases.
    fn for_velocity(limits: &MotionLimits<T>, v: T) -> Self {
        if v <= T::zero() {
            return Self::zero();
        }
        let two = lit::<T>(2.0);
        let jc = limits.jerk_cap();
        let t1 = limits.ramp_time();
        let t2_full = limits.a_max / jc - t1;
        let v_jref = two * jc * t1 * t1;
        let v_aref = limits.a_max * (two * t1 + t2_full);
        if v <= v_jref {
            // v = 2 s t1³
            let t1 = (v / (two * limits.s_max)).cbrt();
            Self {
                t1,
                t2: T::zero(),
                t3: T::zero(),
                jerk: limits.s_max * t1,
            }
        } else if v <= v_aref {
            // v = jc (t1 + t2)(2 t1 + t2), positive root in t2
            let disc = (t1 * t1 + lit::<T>(4.0) * v / jc).sqrt();
            let t2 = two * (v / jc - two * t1 * t1) / (lit::<T>(3.0) * t1 + disc);
            Self {
                t1,
                t2: t2.max(T::zero()).min(t2_full),
                t3: T::zero(),
                jerk: jc,
            }
        } else {
            Self {
                t1,
                t2: t2_full,
                t3: (v / limits.a_max - (two * t1 + t2_full)).max(T::zero()),
                jerk: jc,
            }
        }
    }

    /// The rest-to-rest hump (no cruise) covering exactly `d`.
    fn for_distance(limits: &MotionLimits<T>, d: T) -> Self {
        if d <= T::zero() {
            return Self::zero();
        }
        let two = lit::<T>(2.0);
        let jc = limits.jerk_cap();
        let t1 = limits.ramp_time();
        let t2_full = limits.a_max / jc - t1;
        let d_jref = lit::<T>(8.0) * jc * t1 * t1 * t1;
        let full = Self {
            t1,
            t2: t2_full,
            t3: T::zero(),
            jerk: jc,
        };
        let d_aref = full.distance();
        if d <= d_jref {
            // d = 8 s t1⁴
            let t1 = (d / (lit::<T>(8.0) * limits.s_max)).sqrt().sqrt();
            Self {
                t1,
                t2: T::zero(),
                t3: T::zero(),
                jerk: limits.s_max * t1,
            }
        } else if d <= d_aref {
            let u = solve_plateau_jerk(jc, t1, d, t1 + t2_full);
            Self {
                t1,
                t2: (u - t1).max(T::zero()).min(t2_full),
                t3: T::zero(),
                jerk: jc,
            }
        } else {
            // d = v (c + v / a_max), c = 2 t1 + t2; stable positive root
            let c = two * t1 + t2_full;
            let v = two * d / (c + (c * c + lit::<T>(4.0) * d / limits.a_max).sqrt());
            Self {
                t1,
                t2: t2_full,
                t3: (v / limits.a_max - c).max(T::zero()),
                jerk: jc,
            }
        }
    }
}

/// Solves `2 j u (u + t1)² = d` for `u = t1 + t2` by Newton iteration from
/// the upper bracket; the left side is convex and increasing on `u > 0`, so
/// the iterates decrease monotonically onto the root.
fn solve_plateau_jerk<T: Real>(jerk: T, t1: T, d: T, upper: T) -> T {
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let mut u = upper;
    for _ in 0..200 {
        let w = u + t1;
        let f = two * jerk * u * w * w - d;
        let df = two * jerk * w * (three * u + t1);
        if df <= T::zero() {
            break;
        }
        let next = (u - f / df).max(t1);
        if next >= u {
            break;
        }
        u = next;
    }
    u
}

/// Computes the reference thresholds for `limits`.
pub fn thresholds<T: Real>(limits: &MotionLimits<T>) -> Thresholds<T> {
    let two = lit::<T>(2.0);
    let jc = limits.jerk_cap();
    let t1 = limits.ramp_time();
    let t2 = limits.a_max / jc - t1;
    let full = Hump {
        t1,
        t2,
        t3: T::zero(),
        jerk: jc,
    };
    Thresholds {
        v_aref: limits.a_max * (two * t1 + t2),
        d_aref: full.distance(),
        d_vref: Hump::for_velocity(limits, limits.v_max).distance(),
    }
}

fn check_finite<T: Real>(phi_0: T, phi_1: T) -> Result<()> {
    if phi_0.is_finite() && phi_1.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "positions must be finite, got {phi_0} -> {phi_1}"
        )))
    }
}

/// Decides which bounds a move from `phi_0` to `phi_1` attains.
pub fn classify<T: Real>(
    phi_0: T,
    phi_1: T,
    limits: &MotionLimits<T>,
) -> Result<(TrajectoryType, Thresholds<T>)> {
    check_finite(phi_0, phi_1)?;
    limits.validate()?;
    let th = thresholds(limits);
    let d = (phi_1 - phi_0).abs();
    let ty = if limits.v_max > th.v_aref {
        if d > th.d_vref {
            TrajectoryType::Full
        } else if d > th.d_aref {
            TrajectoryType::AccOnly
        } else {
            TrajectoryType::Neither
        }
    } else if d > th.d_vref {
        TrajectoryType::VelOnly
    } else {
        TrajectoryType::Neither
    };
    Ok((ty, th))
}

/// Closed-form plan for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedTrajectory<T> {
    pub phi_0: T,
    pub phi_1: T,
    /// `+1`, `-1`, or `0` for a null move.
    pub direction: T,
    pub traj_type: TrajectoryType,
    pub t1: T,
    pub t2: T,
    pub t3: T,
    pub t4: T,
    /// Peak jerk actually used, rad/s³.
    pub j_peak: T,
}

/// Position and derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionState<T> {
    pub position: T,
    pub velocity: T,
    pub acceleration: T,
    pub jerk: T,
}

/// Plans a rest-to-rest move from `phi_0` to `phi_1`.
pub fn plan<T: Real>(phi_0: T, phi_1: T, limits: &MotionLimits<T>) -> Result<PlannedTrajectory<T>> {
    let (traj_type, th) = classify(phi_0, phi_1, limits)?;
    let displacement = phi_1 - phi_0;
    let d = displacement.abs();
    if d == T::zero() {
        return Ok(PlannedTrajectory::stationary(phi_0));
    }
    let (hump, t4) = if traj_type.reaches_velocity() {
        let hump = Hump::for_velocity(limits, limits.v_max);
        (hump, ((d - th.d_vref) / limits.v_max).max(T::zero()))
    } else {
        (Hump::for_distance(limits, d), T::zero())
    };
    let t3 = if traj_type.reaches_acceleration() {
        hump.t3
    } else {
        T::zero()
    };
    Ok(PlannedTrajectory {
        phi_0,
        phi_1,
        direction: displacement.signum(),
        traj_type,
        t1: hump.t1,
        t2: hump.t2,
        t3,
        t4,
        j_peak: hump.jerk,
    })
}

impl<T: Real> PlannedTrajectory<T> {
    /// A zero-duration plan holding `position`.
    pub fn stationary(position: T) -> Self {
        Self {
            phi_0: position,
            phi_1: position,
            direction: T::zero(),
            traj_type: TrajectoryType::Neither,
            t1: T::zero(),
            t2: T::zero(),
            t3: T::zero(),
            t4: T::zero(),
            j_peak: T::zero(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.t1 == T::zero() && self.t4 == T::zero()
    }

    pub fn displacement(&self) -> T {
        self.phi_1 - self.phi_0
    }

    /// Duration of one acceleration (or deceleration) half.
    pub fn half_duration(&self) -> T {
        lit::<T>(4.0) * self.t1 + lit::<T>(2.0) * self.t2 + self.t3
    }

    pub fn total_duration(&self) -> T {
        lit::<T>(2.0) * self.half_duration() + self.t4
    }

    /// Snap magnitude on the jerk ramps.
    pub fn snap(&self) -> T {
        if self.t1 > T::zero() {
            self.j_peak / self.t1
        } else {
            T::zero()
        }
    }

    pub fn peak_acceleration(&self) -> T {
        self.j_peak * (self.t1 + self.t2)
    }

    pub fn peak_velocity(&self) -> T {
        self.peak_acceleration() * (lit::<T>(2.0) * self.t1 + self.t2 + self.t3)
    }

    /// Unsigned distance implied by the durations and peak jerk.
    pub fn analytic_displacement(&self) -> T {
        self.peak_velocity() * (self.half_duration() + self.t4)
    }

    /// Stretches the plan in time by `factor` while keeping its endpoints:
    /// every duration is multiplied by `factor` and the peak jerk divided by
    /// `factor³`.
    pub fn time_scaled(&self, factor: T) -> Self {
        Self {
            t1: self.t1 * factor,
            t2: self.t2 * factor,
            t3: self.t3 * factor,
            t4: self.t4 * factor,
            j_peak: self.j_peak / (factor * factor * factor),
            ..*self
        }
    }

    /// Phases from rest to the middle of the cruise as `(duration, snap)`.
    fn first_half_phases(&self) -> [(T, T); 8] {
        let s = self.snap();
        let z = T::zero();
        [
            (self.t1, s),
            (self.t2, z),
            (self.t1, -s),
            (self.t3, z),
            (self.t1, -s),
            (self.t2, z),
            (self.t1, s),
            (self.t4 / lit(2.0), z),
        ]
    }

    /// Unsigned state at `t` within the first half (`0 ≤ t ≤ T/2`).
    fn first_half_state(&self, t: T) -> MotionState<T> {
        let mut st = MotionState::default();
        let mut remaining = t.max(T::zero());
        for (dur, snap) in self.first_half_phases() {
            let dt = remaining.min(dur);
            advance(&mut st, dt, snap);
            remaining = remaining - dt;
            if remaining <= T::zero() {
                break;
            }
        }
        st
    }

    /// Closed-form state at time `t`, clamped to `[0, T]`. The second half is
    /// the point reflection of the first through the trajectory midpoint.
    pub fn state_at(&self, t: T) -> MotionState<T> {
        let total = self.total_duration();
        let half = total / lit(2.0);
        let t = t.max(T::zero()).min(total);
        let dir = self.direction;
        if t <= half {
            let s = self.first_half_state(t);
            MotionState {
                position: self.phi_0 + dir * s.position,
                velocity: dir * s.velocity,
                acceleration: dir * s.acceleration,
                jerk: dir * s.jerk,
            }
        } else {
            let s = self.first_half_state(total - t);
            MotionState {
                position: self.phi_1 - dir * s.position,
                velocity: dir * s.velocity,
                acceleration: -dir * s.acceleration,
                jerk: dir * s.jerk,
            }
        }
    }

    pub fn position_at(&self, t: T) -> T {
        self.state_at(t).position
    }
}

/// Integrates a constant-snap phase exactly.
fn advance<T: Real>(st: &mut MotionState<T>, dt: T, snap: T) {
    if dt <= T::zero() {
        return;
    }
    let dt2 = dt * dt;
    let dt3 = dt2 * dt;
    let dt4 = dt3 * dt;
    st.position = st.position
        + st.velocity * dt
        + st.acceleration * dt2 / lit(2.0)
        + st.jerk * dt3 / lit(6.0)
        + snap * dt4 / lit(24.0);
    st.velocity =
        st.velocity + st.acceleration * dt + st.jerk * dt2 / lit(2.0) + snap * dt3 / lit(6.0);
    st.acceleration = st.acceleration + st.jerk * dt + snap * dt2 / lit(2.0);
    st.jerk = st.jerk + snap * dt;
}

/// Positions sampled on a uniform grid spanning the whole move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory<T> {
    /// Nominal sampling rate, samples/s.
    pub rate: T,
    pub positions: Vec<T>,
    /// Total duration, s.
    pub duration: T,
}

impl<T: Real> SampledTrajectory<T> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Spacing between samples. The grid spans `[0, duration]` with both ends
    /// included, so it is `duration / (n - 1)`, which is never shorter than
    /// `1 / rate`.
    pub fn step(&self) -> T {
        if self.positions.len() < 2 {
            T::zero()
        } else {
            self.duration / T::from_usize(self.positions.len() - 1).unwrap()
        }
    }

    pub fn time_at(&self, index: usize) -> T {
        if index + 1 == self.positions.len() {
            self.duration
        } else {
            self.step() * T::from_usize(index).unwrap()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.positions.len()).map(|k| self.time_at(k))
    }
}

/// Number of samples covering `duration` at `rate`, endpoints included.
pub fn sample_count<T: Real>(duration: T, rate: T) -> usize {
    let x = duration * rate;
    // absorb round-off such as 1999.9999999997 for a 2 s move
    let n = (x + lit::<T>(1e-7)).floor();
    n.to_usize().unwrap_or(0) + 1
}

/// Samples `plan` at `rate` samples per second.
pub fn sample<T: Real>(plan: &PlannedTrajectory<T>, rate: T) -> Result<SampledTrajectory<T>> {
    if !rate.is_finite() || rate <= T::zero() {
        return Err(Error::Input(format!("rate must be positive, got {rate}")));
    }
    let n = sample_count(plan.total_duration(), rate);
    Ok(sample_n(plan, n, rate))
}

/// Samples `plan` at `n` evenly spaced instants over its duration.
///
/// Only the first half is evaluated from the closed form; the second half is
/// the radial mirror of those samples through the midpoint.
pub fn sample_n<T: Real>(plan: &PlannedTrajectory<T>, n: usize, rate: T) -> SampledTrajectory<T> {
    let duration = plan.total_duration();
    let n = n.max(1);
    if n == 1 || plan.is_stationary() {
        return SampledTrajectory {
            rate,
            positions: vec![plan.phi_0; n],
            duration,
        };
    }
    let step = duration / T::from_usize(n - 1).unwrap();
    let mid_value = (plan.phi_0 + plan.phi_1) / lit(2.0);
    let sum = plan.phi_0 + plan.phi_1;
    let mut positions = vec![T::zero(); n];
    for k in 0..n.div_ceil(2) {
        let mirror = n - 1 - k;
        if k == mirror {
            positions[k] = mid_value;
        } else {
            let t = step * T::from_usize(k).unwrap();
            let p = plan.first_half_state(t).position;
            positions[k] = plan.phi_0 + plan.direction * p;
            positions[mirror] = sum - positions[k];
        }
    }
    positions[0] = plan.phi_0;
    let last = positions[n - 1];
    debug_assert!((last - plan.phi_1).abs() <= lit(TERMINAL_TOLERANCE));
    positions[n - 1] = plan.phi_1;
    SampledTrajectory {
        rate,
        positions,
        duration,
    }
}

/// Affine angle-to-pulse-width map of a hobby servo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoCalibration<T> {
    pub angle_min_deg: T,
    pub angle_max_deg: T,
    pub pulse_min_us: T,
    pub pulse_max_us: T,
    pub neutral_deg: T,
}

/// Angles this far outside the range are clamped instead of rejected.
pub const CLAMP_TOLERANCE_DEG: f64 = 0.5;

impl<T: Real> ServoCalibration<T> {
    pub fn new(
        angle_min_deg: T,
        angle_max_deg: T,
        pulse_min_us: T,
        pulse_max_us: T,
        neutral_deg: T,
    ) -> Result<Self> {
        let cal = Self {
            angle_min_deg,
            angle_max_deg,
            pulse_min_us,
            pulse_max_us,
            neutral_deg,
        };
        if !(angle_min_deg < angle_max_deg) {
            return Err(Error::Input("angle_min must be below angle_max".into()));
        }
        if !(pulse_min_us < pulse_max_us) {
            return Err(Error::Input("pulse_min must be below pulse_max".into()));
        }
        if neutral_deg < angle_min_deg || neutral_deg > angle_max_deg {
            return Err(Error::Input("neutral must lie within the range".into()));
        }
        Ok(cal)
    }

    /// Symmetric range of `span_deg` about zero mapped onto 500–2500 µs.
    pub fn symmetric(span_deg: T) -> Self {
        let half = span_deg / lit(2.0);
        Self::new(-half, half, lit(500.0), lit(2500.0), T::zero()).expect("valid calibration")
    }

    /// Femur and tibia servos, 300°.
    pub fn leg_servo() -> Self {
        Self::symmetric(lit(300.0))
    }

    /// Coxa servo, limited to 200° to keep clear of the body.
    pub fn coxa_servo() -> Self {
        Self::symmetric(lit(200.0))
    }

    pub fn pulse_for_deg(&self, deg: T) -> T {
        let frac = (deg - self.angle_min_deg) / (self.angle_max_deg - self.angle_min_deg);
        self.pulse_min_us + frac * (self.pulse_max_us - self.pulse_min_us)
    }
}

/// Converts joint angles (rad) into pulse widths (µs).
pub fn to_pwm<T: Real>(positions: &[T], cal: &ServoCalibration<T>) -> Result<Vec<T>> {
    let tol = lit::<T>(CLAMP_TOLERANCE_DEG);
    positions
        .iter()
        .enumerate()
        .map(|(index, &rad)| {
            let deg = rad.to_degrees();
            let excess = (cal.angle_min_deg - deg).max(deg - cal.angle_max_deg);
            if !deg.is_finite() || excess > tol {
                return Err(Error::PwmRange {
                    index,
                    excess_deg: excess.to_f64_lossy(),
                });
            }
            let pulse = cal.pulse_for_deg(deg);
            Ok(pulse.max(cal.pulse_min_us).min(cal.pulse_max_us))
        })
        .collect()
}
