//! `dactyl`: trajectory export, model report and simulator service.

mod plan;
mod report;
mod serve;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::settings::Flags;

#[derive(Debug, Parser)]
#[command(
    name = "dactyl",
    version,
    about = "Motion planning and simulation for the dactylus quadruped"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Plan one joint move and write its samples as CSV.
    #[command(allow_negative_numbers = true)]
    Plan {
        /// Start angle, rad.
        phi0: f64,
        /// Target angle, rad.
        phi1: f64,
        /// Servo calibration used for the pulse column.
        #[arg(long, value_enum, default_value_t = plan::Servo::Leg)]
        servo: plan::Servo,
        /// CSV destination; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Re-read the written samples and check them against the integrator.
        #[arg(long)]
        verify: bool,
    },
    /// Plan a synchronised multi-joint move from a file of `start target` lines.
    Sync {
        targets: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
    /// Check the mass table of the model and report the inertia increase.
    Report,
    /// Run the simulator, either as a socket service or headless.
    Serve(serve::ServeArgs),
}

/// What went wrong, and which exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unreadable inputs (exit 2).
    Usage(String),
    /// A check failed or the run went wrong (exit 1).
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Plan {
            phi0,
            phi1,
            servo,
            output,
            verify,
        } => plan::run_plan(&cli.flags, phi0, phi1, servo, output.as_deref(), verify),
        Cmd::Sync {
            targets,
            output,
            verify,
        } => plan::run_sync(&cli.flags, &targets, output.as_deref(), verify),
        Cmd::Report => report::run(&cli.flags),
        Cmd::Serve(args) => serve::run(&cli.flags, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.exit_code())
        }
    }
}
