//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use dactyl_core::kinematics::moi_report;
use dactyl_core::kinematics::{fk_leg, ik_leg, leg_points, JointRange};
use dactyl_core::oracle::{finite_difference_peaks, integrate, max_sample_error};
use dactyl_core::profile::{plan, sample, MotionLimits};
use dactyl_core::sync::{plan_synchronized, sample_synchronized};
use dactyl_core::tendon::{joint_force, servo_angle_for_force, TendonParams, TendonPreset};
use dactyl_core::{ExactMassModel, MassModel, RobotModel};
use dactyl_sim::protocol::{Command, CommandMessage, TransitionDirection};
use dactyl_sim::scenario::{load_scenario, replay, to_jsonl};
use dactyl_sim::{default_session, Mode, Session, SimConfig};
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_limits() -> MotionLimits<f64> {
    MotionLimits::new(15.0, 15.0, 5.2).unwrap()
}

fn random_move(rng: &mut StdRng) -> (f64, f64) {
    (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
}

fn limits_respected() -> Outcome {
    let lim = reference_limits();
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    let (mut v, mut a, mut j) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (p0, p1) = random_move(&mut rng);
        let s = sample(&plan(p0, p1, &lim).map_err(|e| e.to_string())?, 1000.0)
            .map_err(|e| e.to_string())?;
        let (pv, pa, pj) = finite_difference_peaks(&s.positions, s.step());
        v = v.max(pv / lim.v_max);
        a = a.max(pa / lim.a_max);
        j = j.max(pj / lim.j_max);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        v <= 1.005 && a <= 1.01 && j <= 1.02 && secs < 10.0,
        format!("1000 plans in {secs:.2} s; peak v/a/j ratios {v:.4}/{a:.4}/{j:.4}"),
    )
}

fn oracle_agreement() -> Outcome {
    let lim = reference_limits();
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (p0, p1) = random_move(&mut rng);
        let p = plan(p0, p1, &lim).map_err(|e| e.to_string())?;
        let s = sample(&p, 1000.0).map_err(|e| e.to_string())?;
        worst = worst.max(max_sample_error(&s, &integrate(&p, 1e5)));
    }
    check(
        worst <= 1e-4,
        format!("200 plans, max deviation from integration {worst:.2e}"),
    )
}

fn terminal_and_symmetry() -> Outcome {
    let lim = reference_limits();
    let mut rng = StdRng::seed_from_u64(3);
    let (mut terminal, mut symmetry) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (p0, p1) = random_move(&mut rng);
        let s = sample(&plan(p0, p1, &lim).map_err(|e| e.to_string())?, 1000.0)
            .map_err(|e| e.to_string())?;
        let n = s.len();
        terminal = terminal.max((s.positions[n - 1] - p1).abs());
        for k in 0..n {
            symmetry = symmetry.max((s.positions[k] + s.positions[n - 1 - k] - (p0 + p1)).abs());
        }
    }
    check(
        terminal <= 1e-3 && symmetry <= 1e-9,
        format!("terminal error {terminal:.2e}, symmetry error {symmetry:.2e}"),
    )
}

fn classification() -> Outcome {
    let mut checked = 0;
    let mut agree = 0;
    for (j, a, v) in [
        (15.0, 15.0, 5.2),
        (100.0, 5.0, 3.0),
        (40.0, 8.0, 6.0),
        (20.0, 50.0, 10.0),
    ] {
        let lim = MotionLimits::new(j, a, v).unwrap();
        for k in 0..60 {
            let d = 0.01 * 1.12f64.powi(k);
            let p = plan(0.0, d, &lim).map_err(|e| e.to_string())?;
            checked += 1;
            if integrate(&p, 1e5).observed_type(&lim, 1e-6) == p.traj_type {
                agree += 1;
            }
        }
    }
    check(
        checked >= 200 && agree == checked,
        format!("{agree}/{checked} grid points agree"),
    )
}

fn synchronisation() -> Outcome {
    let lim = MotionLimits::<f64>::servo_defaults();
    let mut rng = StdRng::seed_from_u64(5);
    let (mut spread, mut landing) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let from: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let to: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sync = plan_synchronized(&from, &to, &lim).map_err(|e| e.to_string())?;
        for p in sync.plans.iter().filter(|p| !p.is_stationary()) {
            spread = spread.max((p.total_duration() - sync.total_duration).abs());
        }
        let s = sample_synchronized(&sync, 1000.0).map_err(|e| e.to_string())?;
        for (row, goal) in s.rows.iter().zip(&to) {
            landing = landing.max((row.last().unwrap() - goal).abs());
        }
    }
    check(
        spread <= 1e-3 && landing <= 1e-3,
        format!("100 vectors, duration spread {spread:.2e} s, landing error {landing:.2e}"),
    )
}

fn tendon() -> Outcome {
    let p = TendonParams::<f64>::preset(TendonPreset::Monofilament);
    let wide = JointRange {
        min: -1e6,
        max: 1e6,
    };
    let mut rng = StdRng::seed_from_u64(6);
    let (mut slope_err, mut round_trip) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (a1, a2) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0));
        let n = |x: f64, y: f64| joint_force(&p.joint(x, y));
        let s1 = (n(a1 + 0.1, a2) - n(a1 - 0.1, a2)) / 0.2;
        let s2 = (n(a1, a2 + 0.1) - n(a1, a2 - 0.1)) / 0.2;
        slope_err = slope_err
            .max((s1 - p.k_t * p.r_1).abs() / (p.k_t * p.r_1))
            .max((s2 + (p.k_t + p.k_s) * p.r_2).abs() / ((p.k_t + p.k_s) * p.r_2));
        let target = n(a1, a2);
        let back =
            servo_angle_for_force(target, &p.joint(0.0, a2), &wide).map_err(|e| e.to_string())?;
        round_trip = round_trip.max((back - a1).abs());
    }
    let rest = joint_force(&p.joint(0.0, 0.0));
    check(
        slope_err <= 1e-9 && round_trip <= 1e-9 && rest == 0.0,
        format!(
            "slope error {slope_err:.2e}, inversion error {round_trip:.2e} rad, rest force {rest}"
        ),
    )
}

fn leg_kinematics() -> Outcome {
    let m = RobotModel::default().legs[0];
    let mut rng = StdRng::seed_from_u64(7);
    let (mut fk_ik, mut links, mut solved) = (0.0f64, 0.0f64, 0);
    while solved < 1000 {
        let q = [
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-2.5..2.5),
            rng.gen_range(0.05..2.6),
        ];
        let pts = leg_points(&q, &m);
        let dist = |a: [f64; 3], b: [f64; 3]| {
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        };
        links = links
            .max((dist(pts.hip, pts.knee) - m.femur_length).abs())
            .max((dist(pts.knee, pts.foot) - m.tibia_length).abs());
        let foot = fk_leg(&q, &m).map_err(|e| e.to_string())?;
        if let Ok(back) = ik_leg(&foot, &m) {
            fk_ik = fk_ik.max(dist(fk_leg(&back, &m).map_err(|e| e.to_string())?, foot));
            solved += 1;
        }
    }
    check(
        fk_ik <= 1e-6 && links <= 1e-12,
        format!("1000 targets, FK∘IK error {fk_ik:.2e} m, link length error {links:.2e} m"),
    )
}

fn mass_table() -> Outcome {
    let exact = ExactMassModel::catalogue_exact();
    let r = moi_report(&MassModel::catalogue().moi);
    let sum = exact.mass_sum();
    check(
        exact.mass_residual() == Ratio::from_integer(0) && (0.57..=0.59).contains(&r.mean_increase),
        format!(
            "mass sum {} g exactly, inertia increase {:.1}% / {:.1}% (mean {:.1}%)",
            *sum.numer() as f64 / *sum.denom() as f64,
            100.0 * r.sagittal_increase,
            100.0 * r.coronal_increase,
            100.0 * r.mean_increase
        ),
    )
}

fn transition() -> Outcome {
    let mut s = default_session(SimConfig::default()).map_err(|e| e.to_string())?;
    let home = *s.sim().joints();
    let mut min_margin = f64::INFINITY;
    let mut ticks = 0u64;
    let mut run = |s: &mut Session, seq, direction| {
        s.submit(&CommandMessage {
            command: Command::BeginTransition { direction },
            seq,
            t_ms: 0,
        });
        while !s.sim().is_idle() {
            s.tick();
            ticks += 1;
            min_margin = min_margin.min(s.sim().margin());
        }
        s.sim().mode()
    };
    let up = run(&mut s, 1, TransitionDirection::ToDual);
    let down = run(&mut s, 2, TransitionDirection::ToStance);
    let restore = s
        .sim()
        .joints()
        .iter()
        .zip(&home)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        up == Mode::DualLegManip && down == Mode::Stance && min_margin >= 0.0 && restore <= 1e-3,
        format!("{ticks} ticks, minimum margin {min_margin:.5} m, restore error {restore:.2e} rad"),
    )
}

fn determinism() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let config_text = std::fs::read_to_string(root.join("scenarios/workbench.toml"))
        .map_err(|e| e.to_string())?;
    let config: SimConfig = toml::from_str(&config_text).map_err(|e| e.to_string())?;
    let commands =
        load_scenario(&root.join("scenarios/dual_leg.jsonl")).map_err(|e| e.to_string())?;
    let trace = || -> Result<(String, Mode), String> {
        let mut s = default_session(config.clone()).map_err(|e| e.to_string())?;
        let events = replay(&mut s, &commands, None);
        Ok((to_jsonl(&events), s.sim().mode()))
    };
    let (a, mode) = trace()?;
    let (b, _) = trace()?;
    check(
        a == b && mode == Mode::DualLegManip,
        format!(
            "{} bytes, {} lines, identical: {}",
            a.len(),
            a.lines().count(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("sampled derivatives within limits", limits_respected),
        ("samples agree with integration", oracle_agreement),
        ("terminal position and symmetry", terminal_and_symmetry),
        ("trajectory classification", classification),
        ("multi-joint synchronisation", synchronisation),
        ("tendon force model", tendon),
        ("leg kinematics", leg_kinematics),
        ("mass and inertia table", mass_table),
        ("stance/dual-leg transition", transition),
        ("deterministic scenario replay", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
