//! CSV writers for sampled trajectories.

use std::fmt::Write;

use crate::profile::SampledTrajectory;
use crate::scalar::Real;
use crate::sync::SyncSamples;

/// `t_s,position_rad,pulse_us`, one row per sample, six decimals, LF endings.
pub fn profile_csv<T: Real>(samples: &SampledTrajectory<T>, pulses: &[T]) -> String {
    let mut out = String::from("t_s,position_rad,pulse_us\n");
    for ((t, p), us) in samples.times().zip(&samples.positions).zip(pulses) {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6}",
            t.to_f64_lossy(),
            p.to_f64_lossy(),
            us.to_f64_lossy()
        );
    }
    out
}

/// `t_s,q0_rad,q1_rad,...`, one row per sample.
pub fn sync_csv<T: Real>(samples: &SyncSamples<T>) -> String {
    let mut out = String::from("t_s");
    for i in 0..samples.rows.len() {
        let _ = write!(out, ",q{i}_rad");
    }
    out.push('\n');
    for k in 0..samples.sample_count() {
        let _ = write!(out, "{:.6}", samples.time_at(k).to_f64_lossy());
        for row in &samples.rows {
            let _ = write!(out, ",{:.6}", row[k].to_f64_lossy());
        }
        out.push('\n');
    }
    out
}

/// Parses the first two columns of a profile CSV back into `(t, position)`.
pub fn read_profile_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("t_s,position_rad,pulse_us") => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut cols = line.split(',');
            let mut next = || {
                cols.next()
                    .ok_or_else(|| format!("row {}: missing column", i + 1))?
                    .parse::<f64>()
                    .map_err(|e| format!("row {}: {e}", i + 1))
            };
            Ok((next()?, next()?))
        })
        .collect()
}

/// Parses a multi-joint CSV into `(times, rows)`.
pub fn read_sync_csv(text: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let joints = header.split(',').count().saturating_sub(1);
    if !header.starts_with("t_s") || joints == 0 {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut times = Vec::new();
    let mut rows = vec![Vec::new(); joints];
    for (i, line) in lines.enumerate() {
        let values = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != joints + 1 {
            return Err(format!("row {}: expected {} columns", i + 1, joints + 1));
        }
        times.push(values[0]);
        for (row, v) in rows.iter_mut().zip(&values[1..]) {
            row.push(*v);
        }
    }
    Ok((times, rows))
}
