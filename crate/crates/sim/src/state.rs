//! The 1 kHz simulator: joint state, operating mode, running motions and
//! tendon grips.
//!
//! Every accepted motion is planned and sampled up front, then consumed one
//! sample per tick. Before a motion is accepted, the stability margin is
//! evaluated at every future tick it would produce (together with any
//! motions already running); a motion that would tip the robot is refused.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use dactyl_core::kinematics::robot::{is_front, is_hind, LegJoints, LEG_COUNT};
use dactyl_core::kinematics::{
    base_angle_for_aperture, dactylus_aperture, ik_leg, Contact, RobotModel, StanceConfig,
};
use dactyl_core::profile::{MotionLimits, DEFAULT_RATE};
use dactyl_core::sync::{plan_synchronized, sample_synchronized};
use dactyl_core::tendon::{
    grip_step, joint_force, micro_servo_range, servo_angle_for_force, slack_joint_force,
    TendonParams,
};
use dactyl_core::Error as CoreError;

use crate::config::{ObjectSpec, SimConfig};
use crate::protocol::{
    Command, CommandMessage, ErrorCode, Event, EventMessage, Snapshot, TransitionDirection,
};
use crate::script::{Script, Segment, DUAL_CONTACTS, STANCE_CONTACTS};

pub const LEG_JOINT_COUNT: usize = 3 * LEG_COUNT;
pub const DACTYLUS_COUNT: usize = 2;
pub const JOINT_COUNT: usize = LEG_JOINT_COUNT + 3 * DACTYLUS_COUNT;

/// Servo movement per tick below which a grip counts as settled, rad.
const SETTLE_EPSILON: f64 = 1e-9;

pub const WRIST: usize = 0;
pub const BASE: usize = 1;
pub const TIP: usize = 2;

/// Index of joint `k` (wrist, base, tip) of dactylus `d`.
pub fn dactylus_joint(d: usize, k: usize) -> usize {
    LEG_JOINT_COUNT + 3 * d + k
}

/// The leg a joint belongs to; dactylus joints belong to their front leg.
pub fn leg_of_joint(joint: usize) -> usize {
    if joint < LEG_JOINT_COUNT {
        joint / 3
    } else {
        (joint - LEG_JOINT_COUNT) / 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Stance,
    SingleLegManip,
    DualLegManip,
    Transitioning,
}

impl Mode {
    /// The wire name, e.g. `DUAL_LEG_MANIP`.
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Stance => "STANCE",
            Mode::SingleLegManip => "SINGLE_LEG_MANIP",
            Mode::DualLegManip => "DUAL_LEG_MANIP",
            Mode::Transitioning => "TRANSITIONING",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Grasp {
    Empty,
    Holding {
        object: String,
        aperture_m: f64,
        force_n: f64,
    },
}

/// A planned joint-space motion consumed one frame per tick.
#[derive(Debug, Clone)]
struct Motion {
    seq: u64,
    joints: Vec<usize>,
    /// `frames[k][i]` is the position of `joints[i]` after `k` ticks;
    /// frame 0 is the start.
    frames: Vec<Vec<f64>>,
    /// Contact schedule, one entry per frame, for scripted transitions.
    contacts: Option<Vec<[Contact; 4]>>,
    final_mode: Option<Mode>,
    cursor: usize,
}

impl Motion {
    fn is_done(&self) -> bool {
        self.cursor + 1 >= self.frames.len()
    }

    fn frame_ahead(&self, k: usize) -> &[f64] {
        let idx = (self.cursor + k).min(self.frames.len() - 1);
        &self.frames[idx]
    }

    fn remaining(&self) -> usize {
        self.frames.len() - 1 - self.cursor
    }
}

#[derive(Debug, Clone)]
struct Grip {
    seq: u64,
    target: f64,
}

#[derive(Debug, Clone)]
struct Dactylus {
    /// Servo deflection driving the tendon, rad.
    alpha_1: f64,
    force: f64,
    grip: Option<Grip>,
    grasp: Grasp,
}

impl Default for Dactylus {
    fn default() -> Self {
        Self {
            alpha_1: 0.0,
            force: 0.0,
            grip: None,
            grasp: Grasp::Empty,
        }
    }
}

type Rejection = (ErrorCode, String);

fn reject<T>(code: ErrorCode, message: impl Into<String>) -> Result<T, Rejection> {
    Err((code, message.into()))
}

fn core_rejection(e: CoreError) -> Rejection {
    let code = match e {
        CoreError::Range { .. } => ErrorCode::JointLimit,
        CoreError::Unreachable { .. } => ErrorCode::Unreachable,
        CoreError::ActuationLimit { .. } => ErrorCode::ActuationLimit,
        CoreError::EmptyStance => ErrorCode::Unstable,
        _ => ErrorCode::Invalid,
    };
    (code, e.to_string())
}

pub struct Simulator {
    config: SimConfig,
    robot: RobotModel<f64>,
    limits: MotionLimits<f64>,
    tendon: TendonParams<f64>,
    tick: u64,
    joints: [f64; JOINT_COUNT],
    mode: Mode,
    contacts: [Contact; 4],
    /// The lifted leg in single-leg manipulation, with the pose it left.
    lifted: Option<(usize, [f64; 3])>,
    /// Leg pose before going up to dual-leg manipulation.
    home: Option<LegJoints<f64>>,
    motions: Vec<Motion>,
    dactyli: [Dactylus; DACTYLUS_COUNT],
    warned: bool,
}

impl Simulator {
    pub fn new(config: SimConfig, robot: RobotModel<f64>) -> Result<Self, CoreError> {
        // Message timestamps are tick counts in milliseconds.
        if config.rate_hz != DEFAULT_RATE {
            return Err(CoreError::Input(format!(
                "the simulator ticks at {DEFAULT_RATE} Hz, got rate_hz = {}",
                config.rate_hz
            )));
        }
        let limits = config.motion_limits()?;
        let tendon = config.tendon_params();
        tendon.validate()?;
        config.transition.validate(&robot)?;
        let mut joints = [0.0; JOINT_COUNT];
        for (leg, q) in config.initial_pose().iter().enumerate() {
            robot.legs[leg].check_ranges(q)?;
            joints[3 * leg..3 * leg + 3].copy_from_slice(q);
        }
        Ok(Self {
            config,
            robot,
            limits,
            tendon,
            tick: 0,
            joints,
            mode: Mode::Stance,
            contacts: STANCE_CONTACTS,
            lifted: None,
            home: None,
            motions: Vec::new(),
            dactyli: Default::default(),
            warned: false,
        })
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn joints(&self) -> &[f64; JOINT_COUNT] {
        &self.joints
    }

    pub fn contacts(&self) -> [Contact; 4] {
        self.contacts
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn robot(&self) -> &RobotModel<f64> {
        &self.robot
    }

    /// Nothing is moving and no grip is settling.
    pub fn is_idle(&self) -> bool {
        self.motions.is_empty() && self.dactyli.iter().all(|d| d.grip.is_none())
    }

    pub fn leg_joints(&self) -> LegJoints<f64> {
        leg_joints_of(&self.joints)
    }

    pub fn stance(&self) -> StanceConfig<f64> {
        StanceConfig {
            contacts: self.contacts,
            joints: self.leg_joints(),
        }
    }

    /// Current margin; an empty support set counts as infinitely unstable.
    pub fn margin(&self) -> f64 {
        margin_of(&self.robot, &self.stance())
    }

    pub fn snapshot(&self) -> Snapshot {
        let stance = self.stance();
        let mut active: Vec<u64> = self.motions.iter().map(|m| m.seq).collect();
        active.extend(
            self.dactyli
                .iter()
                .filter_map(|d| d.grip.as_ref().map(|g| g.seq)),
        );
        active.sort_unstable();
        Snapshot {
            tick: self.tick,
            mode: self.mode,
            joints: self.joints.to_vec(),
            contacts: self.contacts,
            body_pitch_rad: self.robot.body_pitch(&stance),
            com_m: self.robot.center_of_mass(&stance.joints),
            margin_m: self.margin(),
            grip_force_n: [self.dactyli[0].force, self.dactyli[1].force],
            servo_alpha_rad: [self.dactyli[0].alpha_1, self.dactyli[1].alpha_1],
            grasps: [self.dactyli[0].grasp.clone(), self.dactyli[1].grasp.clone()],
            active,
        }
    }

    fn event(&self, seq: u64, event: Event) -> EventMessage {
        EventMessage {
            event,
            seq,
            t_ms: self.tick,
        }
    }

    /// Applies one command now. Returns the events it produced.
    pub fn apply(&mut self, msg: &CommandMessage) -> Vec<EventMessage> {
        let mut out = Vec::new();
        if let Err((code, message)) = self.dispatch(msg, &mut out) {
            out.push(self.event(msg.seq, Event::Error { code, message }));
        }
        out
    }

    fn dispatch(
        &mut self,
        msg: &CommandMessage,
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        match msg.command {
            Command::Query => {
                out.push(self.event(msg.seq, Event::StateSnapshot(self.snapshot())));
                Ok(())
            }
            _ if self.mode == Mode::Transitioning => {
                reject(ErrorCode::Mode, "a transition is in progress")
            }
            Command::SetJointTarget { joint, target_rad } => {
                self.set_joint(msg.seq, joint, target_rad, out)
            }
            Command::SetLegTarget { leg, target_m } => self.set_leg(msg.seq, leg, target_m, out),
            Command::SetGripForce { dactylus, force_n } => {
                self.set_grip(msg.seq, dactylus, force_n, out)
            }
            Command::BeginTransition { direction } => {
                self.begin_transition(msg.seq, direction, out)
            }
        }
    }

    /// Mode and contacts that result from commanding `leg`, without
    /// committing them.
    fn claim_leg(
        &self,
        leg: usize,
    ) -> Result<(Mode, [Contact; 4], Option<(usize, [f64; 3])>), Rejection> {
        match self.mode {
            Mode::Stance if is_front(leg) => {
                let mut contacts = STANCE_CONTACTS;
                contacts[leg] = Contact::None;
                let pose = self.leg_joints()[leg];
                Ok((Mode::SingleLegManip, contacts, Some((leg, pose))))
            }
            Mode::Stance => Ok((Mode::Stance, self.contacts, None)),
            Mode::SingleLegManip => match self.lifted {
                Some((lifted, _)) if lifted == leg || is_hind(leg) => {
                    Ok((self.mode, self.contacts, self.lifted))
                }
                _ => reject(
                    ErrorCode::Mode,
                    format!(
                        "single-leg manipulation already uses leg {}",
                        self.lifted.map_or(0, |l| l.0)
                    ),
                ),
            },
            Mode::DualLegManip if is_front(leg) => Ok((self.mode, self.contacts, None)),
            Mode::DualLegManip => reject(
                ErrorCode::Mode,
                "hind legs carry the body in dual-leg manipulation",
            ),
            Mode::Transitioning => reject(ErrorCode::Mode, "a transition is in progress"),
        }
    }

    fn set_joint(
        &mut self,
        seq: u64,
        joint: usize,
        target: f64,
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        if joint >= JOINT_COUNT {
            return reject(ErrorCode::Invalid, format!("joint {joint} does not exist"));
        }
        if !target.is_finite() {
            return reject(ErrorCode::Invalid, "target must be finite");
        }
        let range = self.joint_range(joint);
        range.check(joint, target).map_err(core_rejection)?;
        let claim = self.claim_leg(leg_of_joint(joint))?;
        let motion = self.plan_motion(seq, vec![joint], &[target])?;
        self.commit(motion, claim, out)
    }

    fn set_leg(
        &mut self,
        seq: u64,
        leg: usize,
        target: [f64; 3],
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        if leg >= LEG_COUNT {
            return reject(ErrorCode::Invalid, format!("leg {leg} does not exist"));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return reject(ErrorCode::Invalid, "target must be finite");
        }
        let q = ik_leg(&target, &self.robot.legs[leg]).map_err(core_rejection)?;
        let claim = self.claim_leg(leg)?;
        let motion = self.plan_motion(seq, vec![3 * leg, 3 * leg + 1, 3 * leg + 2], &q)?;
        self.commit(motion, claim, out)
    }

    fn set_grip(
        &mut self,
        seq: u64,
        d: usize,
        force: f64,
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        if d >= DACTYLUS_COUNT {
            return reject(ErrorCode::Invalid, format!("dactylus {d} does not exist"));
        }
        if !force.is_finite() || force < 0.0 {
            return reject(
                ErrorCode::Invalid,
                "grip force must be finite and non-negative",
            );
        }
        let claim = self.claim_leg(d)?;
        // Refuse up front when even the servo's end stop cannot reach the
        // force at the joint angle where the grip will settle.
        let contact = self.contact_angle(d);
        let settled = self.tendon.joint(self.dactyli[d].alpha_1, contact);
        servo_angle_for_force(force, &settled, &micro_servo_range()).map_err(core_rejection)?;
        // The finger itself stays put as far as balance is concerned, but
        // lifting the leg changes the support under every motion in flight.
        let (base, tip) = (dactylus_joint(d, BASE), dactylus_joint(d, TIP));
        let hold = Motion {
            seq,
            joints: vec![base, tip],
            frames: vec![vec![self.joints[base], self.joints[tip]]],
            contacts: None,
            final_mode: None,
            cursor: 0,
        };
        self.check_motion(&hold, claim.1)?;

        self.preempt(&[base, tip], out);
        self.enter(claim);
        let expected = ((self.tendon.k_t + self.tendon.k_s) * self.tendon.r_2 * contact + force)
            / (self.tendon.k_t * self.tendon.r_1);
        let duration_s = (expected - self.dactyli[d].alpha_1).abs() / self.config.grip_slew_rad_s;
        out.push(self.event(
            seq,
            Event::TrajectoryStarted {
                duration_s,
                joints: vec![base],
            },
        ));
        self.dactyli[d].grip = Some(Grip { seq, target: force });
        Ok(())
    }

    fn begin_transition(
        &mut self,
        seq: u64,
        direction: TransitionDirection,
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        match (direction, self.mode) {
            (TransitionDirection::ToDual, Mode::Stance) => {
                self.home = Some(self.leg_joints());
                let script = self.config.transition.to_dual(self.config.rate_hz);
                self.run_script(seq, script, out)
            }
            (TransitionDirection::ToStance, Mode::DualLegManip) => {
                let home = self.home.unwrap_or_else(|| self.config.initial_pose());
                let script = self.config.transition.to_stance(home, self.config.rate_hz);
                self.run_script(seq, script, out)
            }
            (TransitionDirection::ToStance, Mode::SingleLegManip) => {
                let (leg, pose) = self
                    .lifted
                    .expect("single-leg mode always records the lifted leg");
                let mut lowered = self.leg_joints();
                lowered[leg] = pose;
                let script = Script {
                    segments: vec![Segment {
                        target: lowered,
                        contacts: self.contacts,
                        dwell_ticks: 0,
                        dwell_contacts: STANCE_CONTACTS,
                    }],
                    final_mode: Mode::Stance,
                };
                self.run_script(seq, script, out)
            }
            (TransitionDirection::ToStance, Mode::Stance) => {
                out.push(self.event(
                    seq,
                    Event::TrajectoryStarted {
                        duration_s: 0.0,
                        joints: vec![],
                    },
                ));
                out.push(self.event(seq, Event::TrajectoryCompleted));
                Ok(())
            }
            (dir, mode) => reject(
                ErrorCode::Mode,
                format!("cannot transition {dir:?} from {mode:?}"),
            ),
        }
    }

    fn run_script(
        &mut self,
        seq: u64,
        script: Script,
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        let joints: Vec<usize> = (0..LEG_JOINT_COUNT).collect();
        let mut frames: Vec<Vec<f64>> = vec![self.joints[..LEG_JOINT_COUNT].to_vec()];
        let mut contacts = vec![self.contacts];
        for segment in &script.segments {
            let start = frames.last().unwrap().clone();
            let target: Vec<f64> = segment.target.iter().flatten().copied().collect();
            let rows = self.sample(&start, &target)?;
            for k in 1..rows.len() {
                frames.push(rows[k].clone());
                contacts.push(segment.contacts);
            }
            for _ in 0..segment.dwell_ticks {
                frames.push(target.clone());
                contacts.push(segment.dwell_contacts);
            }
        }
        let motion = Motion {
            seq,
            joints,
            frames,
            contacts: Some(contacts),
            final_mode: Some(script.final_mode),
            cursor: 0,
        };
        self.check_motion(&motion, self.contacts)?;
        self.preempt(&motion.joints, out);
        let ticks = motion.frames.len() - 1;
        out.push(self.event(
            seq,
            Event::TrajectoryStarted {
                duration_s: ticks as f64 / self.config.rate_hz,
                joints: motion.joints.clone(),
            },
        ));
        if ticks == 0 {
            self.settle_mode(script.final_mode);
            out.push(self.event(seq, Event::TrajectoryCompleted));
        } else {
            self.mode = Mode::Transitioning;
            self.motions.push(motion);
        }
        Ok(())
    }

    fn joint_range(&self, joint: usize) -> dactyl_core::kinematics::JointRange<f64> {
        if joint < LEG_JOINT_COUNT {
            self.robot.legs[joint / 3].ranges()[joint % 3]
        } else {
            self.robot.dactylus.ranges()[(joint - LEG_JOINT_COUNT) % 3]
        }
    }

    /// Synchronised samples from `start` to `target`, as frames.
    fn sample(&self, start: &[f64], target: &[f64]) -> Result<Vec<Vec<f64>>, Rejection> {
        let sync = plan_synchronized(start, target, &self.limits).map_err(core_rejection)?;
        let samples = sample_synchronized(&sync, self.config.rate_hz).map_err(core_rejection)?;
        Ok((0..samples.sample_count())
            .map(|k| samples.column(k))
            .collect())
    }

    fn plan_motion(
        &self,
        seq: u64,
        joints: Vec<usize>,
        target: &[f64],
    ) -> Result<Motion, Rejection> {
        let start: Vec<f64> = joints.iter().map(|&j| self.joints[j]).collect();
        let frames = self.sample(&start, target)?;
        Ok(Motion {
            seq,
            joints,
            frames,
            contacts: None,
            final_mode: None,
            cursor: 0,
        })
    }

    fn commit(
        &mut self,
        motion: Motion,
        claim: (Mode, [Contact; 4], Option<(usize, [f64; 3])>),
        out: &mut Vec<EventMessage>,
    ) -> Result<(), Rejection> {
        self.check_motion(&motion, claim.1)?;
        self.preempt(&motion.joints, out);
        self.enter(claim);
        let ticks = motion.frames.len() - 1;
        out.push(self.event(
            motion.seq,
            Event::TrajectoryStarted {
                duration_s: ticks as f64 / self.config.rate_hz,
                joints: motion.joints.clone(),
            },
        ));
        if ticks == 0 {
            out.push(self.event(motion.seq, Event::TrajectoryCompleted));
        } else {
            self.motions.push(motion);
        }
        Ok(())
    }

    fn enter(&mut self, (mode, contacts, lifted): (Mode, [Contact; 4], Option<(usize, [f64; 3])>)) {
        self.mode = mode;
        self.contacts = contacts;
        if mode == Mode::SingleLegManip {
            self.lifted = lifted;
        }
    }

    /// Mode and contacts at the end of a scripted transition.
    fn settle_mode(&mut self, mode: Mode) {
        self.mode = mode;
        self.contacts = match mode {
            Mode::DualLegManip => DUAL_CONTACTS,
            _ => STANCE_CONTACTS,
        };
        if mode == Mode::Stance {
            self.lifted = None;
        }
    }

    /// Cancels running motions and grips that touch any of `joints`.
    fn preempt(&mut self, joints: &[usize], out: &mut Vec<EventMessage>) {
        let wanted: BTreeSet<usize> = joints.iter().copied().collect();
        let mut cancelled = Vec::new();
        self.motions.retain(|m| {
            let hit = m.joints.iter().any(|j| wanted.contains(j));
            if hit {
                cancelled.push(m.seq);
            }
            !hit
        });
        for d in 0..DACTYLUS_COUNT {
            if wanted.contains(&dactylus_joint(d, BASE)) || wanted.contains(&dactylus_joint(d, TIP))
            {
                if let Some(g) = self.dactyli[d].grip.take() {
                    cancelled.push(g.seq);
                }
            }
        }
        for seq in cancelled {
            out.push(self.event(
                seq,
                Event::Error {
                    code: ErrorCode::Preempted,
                    message: "superseded by a newer command".into(),
                },
            ));
        }
    }

    /// Refuses `motion` if the margin would drop below zero at any tick,
    /// taking the other running motions (except those it preempts) into
    /// account.
    fn check_motion(&self, motion: &Motion, contacts: [Contact; 4]) -> Result<(), Rejection> {
        let others: Vec<&Motion> = self
            .motions
            .iter()
            .filter(|m| !m.joints.iter().any(|j| motion.joints.contains(j)))
            .collect();
        let horizon = others
            .iter()
            .map(|m| m.remaining())
            .chain(std::iter::once(motion.remaining()))
            .max()
            .unwrap_or(0);
        if !motion.joints.iter().any(|&j| j < LEG_JOINT_COUNT) && others.is_empty() {
            return self.check_static(contacts);
        }
        let mut joints = self.joints;
        for k in 0..=horizon {
            for m in others.iter().copied().chain(std::iter::once(motion)) {
                for (&j, &q) in m.joints.iter().zip(m.frame_ahead(k)) {
                    joints[j] = q;
                }
            }
            let c = motion.contacts.as_ref().map_or(contacts, |schedule| {
                schedule[(motion.cursor + k).min(schedule.len() - 1)]
            });
            let stance = StanceConfig {
                contacts: c,
                joints: leg_joints_of(&joints),
            };
            let margin = margin_of(&self.robot, &stance);
            if margin < 0.0 {
                return reject(
                    ErrorCode::Unstable,
                    format!(
                        "margin would fall to {:.4} m after {:.3} s",
                        margin,
                        k as f64 / self.config.rate_hz
                    ),
                );
            }
        }
        Ok(())
    }

    fn check_static(&self, contacts: [Contact; 4]) -> Result<(), Rejection> {
        let stance = StanceConfig {
            contacts,
            joints: self.leg_joints(),
        };
        let margin = margin_of(&self.robot, &stance);
        if margin < 0.0 {
            return reject(
                ErrorCode::Unstable,
                format!("margin would be {margin:.4} m"),
            );
        }
        Ok(())
    }

    /// Base flexion at which dactylus `d` meets its object, or its end stop.
    fn contact_angle(&self, d: usize) -> f64 {
        let model = &self.robot.dactylus;
        let tip = self.joints[dactylus_joint(d, TIP)];
        self.object_for(d)
            .and_then(|o| base_angle_for_aperture(o.size_m, tip, model))
            .unwrap_or(model.base_range.max)
            .min(model.base_range.max)
    }

    fn object_for(&self, d: usize) -> Option<&ObjectSpec> {
        self.config.objects.iter().find(|o| o.dactylus == d)
    }

    /// Advances the simulation by one tick.
    pub fn step(&mut self) -> Vec<EventMessage> {
        self.tick += 1;
        let mut out = Vec::new();

        let mut finished = Vec::new();
        for (i, m) in self.motions.iter_mut().enumerate() {
            m.cursor += 1;
            for (&j, &q) in m.joints.iter().zip(&m.frames[m.cursor]) {
                self.joints[j] = q;
            }
            if let Some(schedule) = &m.contacts {
                self.contacts = schedule[m.cursor];
            }
            if m.is_done() {
                finished.push(i);
            }
        }
        let mut done: Vec<Motion> = finished
            .iter()
            .rev()
            .map(|&i| self.motions.remove(i))
            .collect();
        done.reverse();
        for m in done {
            if let Some(mode) = m.final_mode {
                self.settle_mode(mode);
            }
            out.push(self.event(m.seq, Event::TrajectoryCompleted));
        }

        for d in 0..DACTYLUS_COUNT {
            if let Some(event) = self.step_dactylus(d) {
                out.push(event);
            }
        }

        let margin = self.margin();
        if margin < self.config.warning_margin_m {
            if !self.warned {
                self.warned = true;
                out.push(self.event(0, Event::StabilityWarning { margin_m: margin }));
            }
        } else {
            self.warned = false;
        }
        out
    }

    fn step_dactylus(&mut self, d: usize) -> Option<EventMessage> {
        let base = dactylus_joint(d, BASE);
        let model = self.robot.dactylus;
        let tendon = self.tendon;
        let moving = self.motions.iter().any(|m| m.joints.contains(&base));
        let mut event = None;

        if let Some(grip) = self.dactyli[d].grip.clone() {
            let contact = self.contact_angle(d);
            // Until the finger meets the object it feels no force, so the
            // servo heads for the angle that gives the target on contact.
            let joint = tendon.joint(self.dactyli[d].alpha_1, contact);
            let dt = 1.0 / self.config.rate_hz;
            match grip_step(
                &joint,
                grip.target,
                dt,
                self.config.grip_slew_rad_s,
                &micro_servo_range(),
            ) {
                Ok(alpha_1) => {
                    let free = tendon.free_deflection(alpha_1);
                    let (alpha_2, force) = if free >= contact {
                        {
                            let j = tendon.joint(alpha_1, contact);
                            let force = if self.config.tendon_slack {
                                slack_joint_force(&j)
                            } else {
                                joint_force(&j)
                            };
                            (contact, force)
                        }
                    } else {
                        (free.max(model.base_range.min), 0.0)
                    };
                    let settled = (alpha_1 - self.dactyli[d].alpha_1).abs() <= SETTLE_EPSILON;
                    self.dactyli[d].alpha_1 = alpha_1;
                    self.dactyli[d].force = force;
                    self.joints[base] = alpha_2;
                    if settled && (force - grip.target).abs() <= self.config.grip_tolerance_n {
                        self.dactyli[d].grip = None;
                        event = Some(self.event(grip.seq, Event::TrajectoryCompleted));
                    }
                }
                Err(e) => {
                    self.dactyli[d].grip = None;
                    let (code, message) = core_rejection(e);
                    event = Some(self.event(grip.seq, Event::Error { code, message }));
                }
            }
        } else if moving {
            // Position control: the servo follows so the tendon stays balanced.
            let q = self.joints[base];
            let alpha_1 = (tendon.k_t + tendon.k_s) * tendon.r_2 * q / (tendon.k_t * tendon.r_1);
            self.dactyli[d].alpha_1 = micro_servo_range().clamp(alpha_1);
            self.dactyli[d].force = 0.0;
        }

        self.dactyli[d].grasp = self.grasp_state(d);
        event
    }

    fn grasp_state(&self, d: usize) -> Grasp {
        let Some(object) = self.object_for(d) else {
            return Grasp::Empty;
        };
        let q = [
            self.joints[dactylus_joint(d, WRIST)],
            self.joints[dactylus_joint(d, BASE)],
            self.joints[dactylus_joint(d, TIP)],
        ];
        let force = self.dactyli[d].force;
        match dactylus_aperture(&q, &self.robot.dactylus) {
            Ok(pose)
                if pose.aperture <= object.size_m + 1e-9 && force >= object.hold_threshold_n =>
            {
                Grasp::Holding {
                    object: object.id.clone(),
                    aperture_m: pose.aperture,
                    force_n: force,
                }
            }
            _ => Grasp::Empty,
        }
    }
}

fn leg_joints_of(joints: &[f64; JOINT_COUNT]) -> LegJoints<f64> {
    std::array::from_fn(|leg| [joints[3 * leg], joints[3 * leg + 1], joints[3 * leg + 2]])
}

fn margin_of(robot: &RobotModel<f64>, stance: &StanceConfig<f64>) -> f64 {
    robot.stability_margin(stance).unwrap_or(f64::NEG_INFINITY)
}
