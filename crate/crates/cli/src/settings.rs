//! Global flags, environment overrides and the optional config file.
//!
//! Precedence, lowest first: built-in defaults, `DACTYL_*` environment
//! variables, command-line flags, then keys present in `--config`.

use std::path::{Path, PathBuf};

use clap::Args;
use dactyl_core::model::ModelFile;
use dactyl_core::profile::MotionLimits;
use dactyl_sim::SimConfig;

use crate::Failure;

#[derive(Debug, Args)]
pub struct Flags {
    /// Jerk limit, rad/s³.
    #[arg(long, global = true, env = "DACTYL_JMAX", default_value_t = 15.0)]
    pub jmax: f64,
    /// Acceleration limit, rad/s².
    #[arg(long, global = true, env = "DACTYL_AMAX", default_value_t = 15.0)]
    pub amax: f64,
    /// Velocity limit, rad/s.
    #[arg(long, global = true, env = "DACTYL_VMAX", default_value_t = 5.2)]
    pub vmax: f64,
    /// Snap limit, rad/s⁴; ten times the jerk limit if omitted.
    #[arg(long, global = true, env = "DACTYL_SMAX")]
    pub smax: Option<f64>,
    /// Sample rate, Hz.
    #[arg(long, global = true, env = "DACTYL_RATE", default_value_t = 1000.0)]
    pub rate: f64,
    /// Robot description (TOML); the prototype if omitted.
    #[arg(long, global = true, env = "DACTYL_MODEL")]
    pub model: Option<PathBuf>,
    /// Simulator settings (TOML). Keys found here override the flags above.
    #[arg(long, global = true, env = "DACTYL_CONFIG")]
    pub config: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

impl Flags {
    /// Flags merged with the config file.
    pub fn sim_config(&self) -> Result<SimConfig, Failure> {
        let mut table = toml::Table::new();
        table.insert("j_max".into(), self.jmax.into());
        table.insert("a_max".into(), self.amax.into());
        table.insert("v_max".into(), self.vmax.into());
        table.insert("rate_hz".into(), self.rate.into());
        if let Some(s) = self.smax {
            table.insert("s_max".into(), s.into());
        }
        if let Some(path) = &self.config {
            let file: toml::Table = read(path)?
                .parse()
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            table.extend(file);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| Failure::Usage(format!("invalid settings: {e}")))
    }

    pub fn limits(&self) -> Result<(MotionLimits<f64>, f64), Failure> {
        let config = self.sim_config()?;
        let limits = config
            .motion_limits()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        if !config.rate_hz.is_finite() || config.rate_hz <= 0.0 {
            return Err(Failure::Usage(format!(
                "rate must be positive, got {}",
                config.rate_hz
            )));
        }
        Ok((limits, config.rate_hz))
    }

    pub fn model(&self) -> Result<ModelFile, Failure> {
        match &self.model {
            Some(path) => ModelFile::load(path).map_err(|e| Failure::Usage(e.to_string())),
            None => Ok(ModelFile::default()),
        }
    }
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

/// Summary lines go to standard output unless it already carries data.
pub fn say(data_on_stdout: bool, line: &str) {
    if data_on_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}
