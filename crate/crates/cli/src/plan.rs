//! `plan` and `sync`.

use std::path::Path;

use clap::ValueEnum;
use dactyl_core::export::{profile_csv, read_profile_csv, read_sync_csv, sync_csv};
use dactyl_core::oracle::{integrate, verify_samples};
use dactyl_core::profile::{plan, sample, sample_count, to_pwm, ServoCalibration};
use dactyl_core::sync::{plan_synchronized, sample_synchronized};
use dactyl_core::PlannedTrajectory;

use crate::settings::{emit, say, Flags};
use crate::{Failure, Outcome};

/// Largest allowed gap between re-read samples and the integrated profile.
const ORACLE_TOLERANCE: f64 = 1e-4;
/// Largest allowed miss of the final sample.
const LANDING_TOLERANCE: f64 = 1e-3;
/// Integration rate of the reference profile, Hz.
const ORACLE_RATE: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Servo {
    /// Femur and tibia, 300° span.
    Leg,
    /// Coxa, 200° span.
    Coxa,
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn run_plan(
    flags: &Flags,
    phi0: f64,
    phi1: f64,
    servo: Servo,
    output: Option<&Path>,
    verify: bool,
) -> Outcome {
    let (limits, rate) = flags.limits()?;
    let p = plan(phi0, phi1, &limits).map_err(usage)?;
    let samples = sample(&p, rate).map_err(usage)?;
    let cal = match servo {
        Servo::Leg => ServoCalibration::leg_servo(),
        Servo::Coxa => ServoCalibration::coxa_servo(),
    };
    let pulses = to_pwm(&samples.positions, &cal).map_err(usage)?;
    emit(output, &profile_csv(&samples, &pulses))?;

    let quiet = output.is_none();
    say(quiet, &format!("type       {}", p.traj_type.as_str()));
    say(
        quiet,
        &format!(
            "T1..T4     {:.6} {:.6} {:.6} {:.6} s",
            p.t1, p.t2, p.t3, p.t4
        ),
    );
    say(quiet, &format!("duration   {:.6} s", p.total_duration()));
    say(quiet, &format!("samples    {}", samples.len()));

    if verify {
        let text = match output {
            Some(path) => {
                std::fs::read_to_string(path).map_err(|e| Failure::Runtime(e.to_string()))?
            }
            None => profile_csv(&samples, &pulses),
        };
        let rows = read_profile_csv(&text).map_err(Failure::Runtime)?;
        let worst = column_error(&p, rows.iter().copied())?;
        let expected = sample_count(p.total_duration(), rate);
        if rows.len() != expected {
            return Err(Failure::Runtime(format!(
                "{} rows, expected {expected}",
                rows.len()
            )));
        }
        let landing = (rows.last().map_or(f64::NAN, |r| r.1) - phi1).abs();
        let checks = verify_samples(&p, &samples);
        if !(landing <= LANDING_TOLERANCE) || !checks.passes(&limits) {
            return Err(Failure::Runtime(format!(
                "verification failed: landing {landing:.3e}, {checks:?}"
            )));
        }
        say(
            quiet,
            &format!("verify     PASS (max error {worst:.2e} rad)"),
        );
    }
    Ok(())
}

/// Largest deviation of `(t, position)` rows from the integrated profile.
fn column_error(
    p: &PlannedTrajectory,
    rows: impl Iterator<Item = (f64, f64)>,
) -> Result<f64, Failure> {
    let trace = integrate(p, ORACLE_RATE);
    let mut worst = 0.0f64;
    for (t, x) in rows {
        let reference = if p.is_stationary() {
            p.phi_0
        } else {
            trace.position_at(t)
        };
        worst = worst.max((x - reference).abs());
    }
    if worst <= ORACLE_TOLERANCE {
        Ok(worst)
    } else {
        Err(Failure::Runtime(format!(
            "samples deviate from integration by {worst:.3e} rad"
        )))
    }
}

/// Reads `start target` pairs, one joint per line; `#` starts a comment.
fn read_targets(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let (mut from, mut to) = (Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let [a, b] = values[..] else {
            return Err(Failure::Usage(format!(
                "{}:{}: expected `start target`",
                path.display(),
                i + 1
            )));
        };
        from.push(a);
        to.push(b);
    }
    Ok((from, to))
}

pub fn run_sync(flags: &Flags, targets: &Path, output: Option<&Path>, verify: bool) -> Outcome {
    let (limits, rate) = flags.limits()?;
    let (from, to) = read_targets(targets)?;
    let sync = plan_synchronized(&from, &to, &limits).map_err(usage)?;
    let samples = sample_synchronized(&sync, rate).map_err(usage)?;
    emit(output, &sync_csv(&samples))?;

    let quiet = output.is_none();
    say(quiet, &format!("joints     {}", sync.plans.len()));
    say(quiet, &format!("duration   {:.6} s", sync.total_duration));
    match sync.limiting_joint {
        Some(j) => say(quiet, &format!("limiting   q{j}")),
        None => say(quiet, "limiting   none (nothing moves)"),
    }
    for (j, (p, sigma)) in sync.plans.iter().zip(&sync.scale_factors).enumerate() {
        let sigma = sigma.map_or("-".to_string(), |s| format!("{s:.6}"));
        say(
            quiet,
            &format!("q{j:<9} {} stretch {sigma}", p.traj_type.as_str()),
        );
    }
    say(quiet, &format!("samples    {}", samples.sample_count()));

    if verify {
        let text = match output {
            Some(path) => {
                std::fs::read_to_string(path).map_err(|e| Failure::Runtime(e.to_string()))?
            }
            None => sync_csv(&samples),
        };
        let (times, rows) = read_sync_csv(&text).map_err(Failure::Runtime)?;
        let mut worst = 0.0f64;
        for ((p, row), goal) in sync.plans.iter().zip(&rows).zip(&to) {
            if !p.is_stationary() && (p.total_duration() - sync.total_duration).abs() > 1e-3 {
                return Err(Failure::Runtime(
                    "joint durations differ by more than 1 ms".into(),
                ));
            }
            worst = worst.max(column_error(
                p,
                times.iter().copied().zip(row.iter().copied()),
            )?);
            let landing = (row.last().copied().unwrap_or(f64::NAN) - goal).abs();
            if !(landing <= LANDING_TOLERANCE) {
                return Err(Failure::Runtime(format!(
                    "final sample misses target by {landing:.3e} rad"
                )));
            }
        }
        say(
            quiet,
            &format!("verify     PASS (max error {worst:.2e} rad)"),
        );
    }
    Ok(())
}
