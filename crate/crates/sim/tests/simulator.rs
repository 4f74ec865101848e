use dactyl_core::profile::{plan, MotionLimits};
use dactyl_core::Contact;
use dactyl_sim::protocol::{
    Command, CommandMessage, ErrorCode, Event, EventMessage, TransitionDirection,
};
use dactyl_sim::state::{dactylus_joint, BASE, JOINT_COUNT, TIP};
use dactyl_sim::{default_session, Grasp, Mode, ObjectSpec, Session, SimConfig};

fn session() -> Session {
    default_session(SimConfig::default()).unwrap()
}

fn send(s: &mut Session, seq: u64, command: Command) -> Vec<EventMessage> {
    s.submit(&CommandMessage {
        command,
        seq,
        t_ms: 0,
    })
}

fn error_code(events: &[EventMessage], seq: u64) -> Option<ErrorCode> {
    events.iter().find_map(|e| match &e.event {
        Event::Error { code, .. } if e.seq == seq => Some(*code),
        _ => None,
    })
}

fn completed_at(events: &[EventMessage], seq: u64) -> Option<u64> {
    events
        .iter()
        .find(|e| e.seq == seq && matches!(e.event, Event::TrajectoryCompleted))
        .map(|e| e.t_ms)
}

fn run_until_idle(s: &mut Session) -> Vec<EventMessage> {
    s.settle(60_000)
}

fn lift_left_front(s: &mut Session) {
    let ev = send(
        s,
        100,
        Command::SetJointTarget {
            joint: dactylus_joint(0, BASE),
            target_rad: 0.0,
        },
    );
    assert_eq!(completed_at(&ev, 100), Some(0));
    assert_eq!(s.sim().mode(), Mode::SingleLegManip);
}

#[test]
fn idle_tick_only_advances_the_clock() {
    let mut s = session();
    let before = s.sim().snapshot();
    for _ in 0..7 {
        s.tick();
    }
    let mut after = s.sim().snapshot();
    assert_eq!(after.tick, 7);
    after.tick = before.tick;
    assert_eq!(after, before);
}

#[test]
fn clock_counts_milliseconds() {
    let mut s = session();
    let events = s.advance_to(1000);
    assert_eq!(s.clock(), 1000);
    // Telemetry at 50 Hz.
    let snapshots: Vec<u64> = events
        .iter()
        .filter(|e| matches!(e.event, Event::StateSnapshot(_)))
        .map(|e| e.t_ms)
        .collect();
    assert_eq!(snapshots.len(), 50);
    assert!(snapshots.iter().all(|t| t % 20 == 0));
}

#[test]
fn target_equal_to_current_completes_immediately() {
    let mut s = session();
    let q = s.sim().joints()[7];
    let ev = send(
        &mut s,
        1,
        Command::SetJointTarget {
            joint: 7,
            target_rad: q,
        },
    );
    assert!(
        matches!(ev[0].event, Event::TrajectoryStarted { duration_s, .. } if duration_s == 0.0)
    );
    assert_eq!(completed_at(&ev, 1), Some(0));
    assert!(s.sim().is_idle());
}

#[test]
fn two_second_trajectory_takes_two_thousand_ticks() {
    let config = SimConfig {
        j_max: 2.0,
        a_max: 2.0,
        v_max: 0.8,
        ..SimConfig::default()
    };
    let limits = config.motion_limits().unwrap();
    // Displacement whose profile lasts exactly 2 s.
    let (mut lo, mut hi) = (0.0, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if plan(0.0, mid, &limits).unwrap().total_duration() < 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = hi;
    assert!((plan(0.0, d, &limits).unwrap().total_duration() - 2.0).abs() < 1e-12);

    let mut s = default_session(config).unwrap();
    let wrist = dactylus_joint(0, 0);
    let mut events = send(
        &mut s,
        1,
        Command::SetJointTarget {
            joint: wrist,
            target_rad: d,
        },
    );
    events.extend(run_until_idle(&mut s));
    assert_eq!(completed_at(&events, 1), Some(2000));
    assert!((s.sim().joints()[wrist] - d).abs() < 1e-12);
}

#[test]
fn out_of_reach_leg_target_is_refused() {
    let mut s = session();
    let hip = s.sim().robot().legs[0].hip_offset;
    let target = [hip[0], hip[1], hip[2] - 0.25];
    let ev = send(
        &mut s,
        1,
        Command::SetLegTarget {
            leg: 0,
            target_m: target,
        },
    );
    assert_eq!(error_code(&ev, 1), Some(ErrorCode::Unreachable));
    assert_eq!(ev.len(), 1);
    assert_eq!(s.sim().mode(), Mode::Stance);
}

#[test]
fn invalid_and_out_of_range_targets() {
    let mut s = session();
    let ev = send(
        &mut s,
        1,
        Command::SetJointTarget {
            joint: 1,
            target_rad: 3.0,
        },
    );
    assert_eq!(error_code(&ev, 1), Some(ErrorCode::JointLimit));
    let ev = send(
        &mut s,
        2,
        Command::SetJointTarget {
            joint: JOINT_COUNT,
            target_rad: 0.0,
        },
    );
    assert_eq!(error_code(&ev, 2), Some(ErrorCode::Invalid));
    let ev = send(
        &mut s,
        3,
        Command::SetJointTarget {
            joint: 0,
            target_rad: f64::NAN,
        },
    );
    assert_eq!(error_code(&ev, 3), Some(ErrorCode::Invalid));
    let ev = send(
        &mut s,
        4,
        Command::SetLegTarget {
            leg: 4,
            target_m: [0.0; 3],
        },
    );
    assert_eq!(error_code(&ev, 4), Some(ErrorCode::Invalid));
    let ev = send(
        &mut s,
        5,
        Command::SetGripForce {
            dactylus: 2,
            force_n: 0.1,
        },
    );
    assert_eq!(error_code(&ev, 5), Some(ErrorCode::Invalid));
    let ev = send(
        &mut s,
        6,
        Command::SetGripForce {
            dactylus: 0,
            force_n: -1.0,
        },
    );
    assert_eq!(error_code(&ev, 6), Some(ErrorCode::Invalid));
    // Base flexion only closes.
    let ev = send(
        &mut s,
        7,
        Command::SetJointTarget {
            joint: dactylus_joint(1, BASE),
            target_rad: -0.1,
        },
    );
    assert_eq!(error_code(&ev, 7), Some(ErrorCode::JointLimit));
    assert_eq!(s.sim().mode(), Mode::Stance);
}

#[test]
fn front_leg_command_lifts_that_leg() {
    let mut s = session();
    lift_left_front(&mut s);
    assert_eq!(
        s.sim().contacts(),
        [Contact::None, Contact::Foot, Contact::Foot, Contact::Foot]
    );
    assert!(s.sim().margin() > 0.0);

    // The other front leg is still needed for support.
    let ev = send(
        &mut s,
        2,
        Command::SetGripForce {
            dactylus: 1,
            force_n: 0.2,
        },
    );
    assert_eq!(error_code(&ev, 2), Some(ErrorCode::Mode));
    let ev = send(
        &mut s,
        3,
        Command::BeginTransition {
            direction: TransitionDirection::ToDual,
        },
    );
    assert_eq!(error_code(&ev, 3), Some(ErrorCode::Mode));

    // Hind legs may still adjust.
    let q = s.sim().joints()[6];
    let ev = send(
        &mut s,
        4,
        Command::SetJointTarget {
            joint: 6,
            target_rad: q + 0.05,
        },
    );
    assert!(error_code(&ev, 4).is_none(), "{ev:?}");
}

#[test]
fn returning_to_stance_restores_the_lifted_leg() {
    let mut s = session();
    let home = s.sim().leg_joints();
    lift_left_front(&mut s);
    let hip = s.sim().robot().legs[0].hip_offset;
    let ev = send(
        &mut s,
        2,
        Command::SetLegTarget {
            leg: 0,
            target_m: [hip[0] + 0.03, hip[1] + 0.02, hip[2] - 0.08],
        },
    );
    assert!(error_code(&ev, 2).is_none(), "{ev:?}");
    run_until_idle(&mut s);
    assert!((s.sim().leg_joints()[0][1] - home[0][1]).abs() > 0.1);

    let mut ev = send(
        &mut s,
        3,
        Command::BeginTransition {
            direction: TransitionDirection::ToStance,
        },
    );
    assert_eq!(s.sim().mode(), Mode::Transitioning);
    ev.extend(run_until_idle(&mut s));
    assert!(completed_at(&ev, 3).is_some());
    assert_eq!(s.sim().mode(), Mode::Stance);
    assert_eq!(s.sim().contacts(), [Contact::Foot; 4]);
    for (a, b) in s
        .sim()
        .leg_joints()
        .iter()
        .flatten()
        .zip(home.iter().flatten())
    {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn reaching_too_far_forward_is_refused_as_unstable() {
    let mut s = session();
    lift_left_front(&mut s);
    let before = *s.sim().joints();
    let hip = s.sim().robot().legs[0].hip_offset;
    let ev = send(
        &mut s,
        2,
        Command::SetLegTarget {
            leg: 0,
            target_m: [hip[0] + 0.19, hip[1], hip[2] - 0.02],
        },
    );
    assert_eq!(error_code(&ev, 2), Some(ErrorCode::Unstable), "{ev:?}");
    s.advance_to(100);
    assert_eq!(s.sim().joints(), &before);
}

#[test]
fn overlapping_command_preempts_cleanly() {
    let mut s = session();
    let wrist = dactylus_joint(0, 0);
    let limits = MotionLimits::<f64>::servo_defaults();
    send(
        &mut s,
        1,
        Command::SetJointTarget {
            joint: wrist,
            target_rad: 1.2,
        },
    );
    let mut trace = vec![s.sim().joints()[wrist]];
    for _ in 0..300 {
        s.tick();
        trace.push(s.sim().joints()[wrist]);
    }
    let ev = send(
        &mut s,
        2,
        Command::SetJointTarget {
            joint: wrist,
            target_rad: -0.4,
        },
    );
    assert_eq!(error_code(&ev, 1), Some(ErrorCode::Preempted));
    assert!(matches!(
        ev.last().unwrap().event,
        Event::TrajectoryStarted { .. }
    ));
    let mut rest = Vec::new();
    while !s.sim().is_idle() {
        rest.extend(s.tick());
        trace.push(s.sim().joints()[wrist]);
    }
    assert!(completed_at(&rest, 2).is_some());
    assert!(completed_at(&rest, 1).is_none());
    assert!((s.sim().joints()[wrist] + 0.4).abs() < 1e-12);
    let step = limits.v_max * 1e-3 * (1.0 + 1e-6);
    for w in trace.windows(2) {
        assert!((w[1] - w[0]).abs() <= step, "jump {}", (w[1] - w[0]).abs());
    }
}

#[test]
fn transition_blocks_other_commands() {
    let mut s = session();
    send(
        &mut s,
        1,
        Command::BeginTransition {
            direction: TransitionDirection::ToDual,
        },
    );
    s.advance_to(10);
    assert_eq!(s.sim().mode(), Mode::Transitioning);
    for (seq, cmd) in [
        (
            2,
            Command::SetJointTarget {
                joint: 0,
                target_rad: 0.0,
            },
        ),
        (
            3,
            Command::SetGripForce {
                dactylus: 0,
                force_n: 0.1,
            },
        ),
        (
            4,
            Command::BeginTransition {
                direction: TransitionDirection::ToStance,
            },
        ),
    ] {
        let ev = send(&mut s, seq, cmd);
        assert_eq!(error_code(&ev, seq), Some(ErrorCode::Mode));
    }
    let ev = send(&mut s, 5, Command::Query);
    assert!(matches!(&ev[0].event, Event::StateSnapshot(snap) if snap.mode == Mode::Transitioning));
}

#[test]
fn hind_legs_are_locked_in_dual_mode() {
    let mut s = session();
    send(
        &mut s,
        1,
        Command::BeginTransition {
            direction: TransitionDirection::ToDual,
        },
    );
    run_until_idle(&mut s);
    assert_eq!(s.sim().mode(), Mode::DualLegManip);
    let ev = send(
        &mut s,
        2,
        Command::SetJointTarget {
            joint: 7,
            target_rad: -1.0,
        },
    );
    assert_eq!(error_code(&ev, 2), Some(ErrorCode::Mode));
    let ev = send(
        &mut s,
        3,
        Command::BeginTransition {
            direction: TransitionDirection::ToDual,
        },
    );
    assert_eq!(error_code(&ev, 3), Some(ErrorCode::Mode));
    // Both front legs are free.
    for (seq, joint) in [(4, 12), (5, 15)] {
        let ev = send(
            &mut s,
            seq,
            Command::SetJointTarget {
                joint,
                target_rad: 0.2,
            },
        );
        assert!(error_code(&ev, seq).is_none(), "{ev:?}");
    }
}

fn gripping_session(size_m: f64) -> Session {
    let config = SimConfig {
        objects: vec![ObjectSpec {
            id: "bolt".into(),
            dactylus: 0,
            size_m,
            hold_threshold_n: 0.5,
        }],
        ..SimConfig::default()
    };
    default_session(config).unwrap()
}

#[test]
fn grip_regulates_force_on_an_object() {
    let mut s = gripping_session(0.02);
    let mut ev = send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 0,
            force_n: 0.8,
        },
    );
    let Event::TrajectoryStarted { duration_s, .. } = ev[0].event else {
        panic!("{ev:?}")
    };
    ev.extend(run_until_idle(&mut s));
    let done = completed_at(&ev, 1).unwrap();
    // The servo slews at a fixed rate, so the predicted duration is exact
    // to within a tick.
    assert!(
        (done as f64 / 1000.0 - duration_s).abs() <= 2e-3,
        "{done} vs {duration_s}"
    );
    let snap = s.sim().snapshot();
    assert!((snap.grip_force_n[0] - 0.8).abs() <= 1e-3);
    match &snap.grasps[0] {
        Grasp::Holding {
            object,
            aperture_m,
            force_n,
        } => {
            assert_eq!(object, "bolt");
            assert!((aperture_m - 0.02).abs() < 1e-9);
            assert!((force_n - 0.8).abs() <= 1e-3);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(snap.grasps[1], Grasp::Empty);
}

#[test]
fn light_grip_does_not_hold() {
    let mut s = gripping_session(0.02);
    send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 0,
            force_n: 0.2,
        },
    );
    run_until_idle(&mut s);
    let snap = s.sim().snapshot();
    assert!((snap.grip_force_n[0] - 0.2).abs() <= 1e-3);
    assert_eq!(snap.grasps[0], Grasp::Empty);
}

#[test]
fn empty_hand_closes_against_the_propodus() {
    let mut s = session();
    let mut ev = send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 1,
            force_n: 0.5,
        },
    );
    ev.extend(run_until_idle(&mut s));
    assert!(completed_at(&ev, 1).is_some());
    let base = dactylus_joint(1, BASE);
    let closed = s.sim().robot().dactylus.base_range.max;
    assert!((s.sim().joints()[base] - closed).abs() < 1e-12);
    assert_eq!(s.sim().snapshot().grasps[1], Grasp::Empty);
}

#[test]
fn unattainable_grip_force_is_refused() {
    let mut s = gripping_session(0.02);
    let ev = send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 0,
            force_n: 50.0,
        },
    );
    assert_eq!(error_code(&ev, 1), Some(ErrorCode::ActuationLimit));
    assert!(s.sim().is_idle());
}

#[test]
fn moving_the_finger_cancels_the_grip() {
    let mut s = gripping_session(0.02);
    send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 0,
            force_n: 0.8,
        },
    );
    s.advance_to(50);
    let ev = send(
        &mut s,
        2,
        Command::SetJointTarget {
            joint: dactylus_joint(0, TIP),
            target_rad: 0.1,
        },
    );
    assert_eq!(error_code(&ev, 1), Some(ErrorCode::Preempted));
}

#[test]
fn stability_warning_is_edge_triggered() {
    let config = SimConfig {
        warning_margin_m: 0.05,
        ..SimConfig::default()
    };
    let mut s = default_session(config).unwrap();
    let events = s.advance_to(500);
    let warnings: Vec<&EventMessage> = events
        .iter()
        .filter(|e| matches!(e.event, Event::StabilityWarning { .. }))
        .collect();
    assert_eq!(warnings.len(), 1);
    assert_eq!(warnings[0].seq, 0);
    assert_eq!(warnings[0].t_ms, 1);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn command() -> impl Strategy<Value = Command> {
        prop_oneof![
            (0usize..18, -2.0f64..2.0)
                .prop_map(|(joint, target_rad)| Command::SetJointTarget { joint, target_rad }),
            (0usize..4, -0.15f64..0.15, -0.15f64..0.15, -0.2f64..0.0).prop_map(|(leg, x, y, z)| {
                Command::SetLegTarget {
                    leg,
                    target_m: [x, y, z],
                }
            }),
            (0usize..2, 0.0f64..3.0)
                .prop_map(|(dactylus, force_n)| Command::SetGripForce { dactylus, force_n }),
            Just(Command::BeginTransition {
                direction: TransitionDirection::ToStance
            }),
            Just(Command::Query),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        /// Without the transition script the robot never reaches dual-leg
        /// mode; every command gets exactly one terminal event; joints stay
        /// inside their ranges; margin stays non-negative.
        #[test]
        fn random_sessions_respect_invariants(
            cmds in proptest::collection::vec((command(), 0u64..400), 1..12)
        ) {
            let mut s = gripping_session(0.02);
            let mut events = Vec::new();
            let mut t = 0;
            for (i, (cmd, gap)) in cmds.iter().enumerate() {
                t += gap;
                events.extend(s.submit(&CommandMessage { command: cmd.clone(), seq: i as u64 + 1, t_ms: t }));
                prop_assert_ne!(s.sim().mode(), Mode::DualLegManip);
            }
            let tail = s.settle(20_000);
            events.extend(tail);
            for seq in 1..=cmds.len() as u64 {
                let terminal = events.iter().filter(|e| e.seq == seq && e.is_terminal()).count();
                prop_assert_eq!(terminal, 1, "seq {}", seq);
            }
            let snap = s.sim().snapshot();
            let robot = s.sim().robot();
            for (j, q) in snap.joints.iter().enumerate() {
                let range = if j < 12 {
                    robot.legs[j / 3].ranges()[j % 3]
                } else {
                    robot.dactylus.ranges()[(j - 12) % 3]
                };
                prop_assert!(range.contains(*q), "joint {} at {}", j, q);
            }
            for e in &events {
                if let Event::StateSnapshot(snap) = &e.event {
                    prop_assert!(snap.margin_m >= 0.0, "margin {} at {}", snap.margin_m, snap.tick);
                }
            }
        }
    }
}

#[test]
fn mode_names_match_the_wire() {
    for m in [
        Mode::Stance,
        Mode::SingleLegManip,
        Mode::DualLegManip,
        Mode::Transitioning,
    ] {
        assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
    }
}

#[test]
fn only_the_millisecond_clock_is_supported() {
    let config = SimConfig {
        rate_hz: 500.0,
        ..SimConfig::default()
    };
    assert!(default_session(config).is_err());
}

#[test]
fn grip_is_refused_when_lifting_the_leg_would_topple_a_running_move() {
    let mut s = gripping_session(0.02);
    // Both moves are fine on four feet, but together they shift the centre
    // of mass outside the tripod left once the front-left leg lifts.
    send(
        &mut s,
        1,
        Command::SetJointTarget {
            joint: 10,
            target_rad: 1.5648546249682664,
        },
    );
    send(
        &mut s,
        2,
        Command::SetJointTarget {
            joint: 8,
            target_rad: 0.0,
        },
    );
    let ev = send(
        &mut s,
        3,
        Command::SetGripForce {
            dactylus: 0,
            force_n: 0.0,
        },
    );
    assert_eq!(error_code(&ev, 3), Some(ErrorCode::Unstable));
    assert_eq!(s.sim().mode(), Mode::Stance);
}

#[test]
fn feather_light_grip_closes_at_full_slew() {
    let mut s = session();
    let mut ev = send(
        &mut s,
        1,
        Command::SetGripForce {
            dactylus: 1,
            force_n: 1e-5,
        },
    );
    let Event::TrajectoryStarted { duration_s, .. } = ev[0].event else {
        panic!()
    };
    ev.extend(run_until_idle(&mut s));
    let done = completed_at(&ev, 1).expect("grip completes");
    assert!(
        (done as f64) <= duration_s * 1000.0 + 2.0,
        "{done} ms vs {duration_s} s"
    );
}

#[test]
fn linear_tendon_law_gives_the_same_settled_grip() {
    // While regulating, the tendon is taut, so the clamp never engages.
    let run = |slack| {
        let config = SimConfig {
            tendon_slack: slack,
            objects: vec![ObjectSpec { id: "bolt".into(), dactylus: 0, size_m: 0.02, hold_threshold_n: 0.5 }],
            ..SimConfig::default()
        };
        let mut s = default_session(config).unwrap();
        send(&mut s, 1, Command::SetGripForce { dactylus: 0, force_n: 0.8 });
        run_until_idle(&mut s);
        s.sim().snapshot().grip_force_n[0]
    };
    assert_eq!(run(true), run(false));
}
