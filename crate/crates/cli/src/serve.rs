//! `serve`: the simulator behind sockets, or a headless scenario replay.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;

use clap::Args;
use dactyl_sim::protocol::{CommandMessage, EventMessage};
use dactyl_sim::scenario::{load_scenario, replay, to_jsonl};
use dactyl_sim::server::{start, Pacing, ServerConfig};
use dactyl_sim::state::Simulator;
use dactyl_sim::{Mode, Session};

use crate::settings::{emit, Flags};
use crate::{Failure, Outcome};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Address of the newline-delimited JSON endpoint.
    #[arg(long, env = "DACTYL_BIND", default_value = "127.0.0.1:7878")]
    bind: String,
    /// Address of the websocket endpoint; none if omitted.
    #[arg(long, env = "DACTYL_WS_BIND")]
    ws_bind: Option<String>,
    /// Command file (one JSON message per line) to replay before exiting.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Run without sockets.
    #[arg(long)]
    headless: bool,
    /// Stop after exactly this many milliseconds; later commands are dropped.
    #[arg(long, requires = "headless")]
    ticks: Option<u64>,
    /// Advance the clock only as commands ask for it instead of in real time.
    #[arg(long)]
    lockstep: bool,
    /// Write the event trace (JSON lines) here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fail unless the run ends in this mode, e.g. DUAL_LEG_MANIP.
    #[arg(long)]
    expect_mode: Option<String>,
}

fn session(flags: &Flags) -> Result<Session, Failure> {
    let config = flags.sim_config()?;
    let robot = flags.model()?.robot();
    let sim = Simulator::new(config, robot).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Session::new(sim))
}

fn scenario(args: &ServeArgs) -> Result<Vec<CommandMessage>, Failure> {
    match &args.scenario {
        Some(path) => load_scenario(path).map_err(|e| Failure::Usage(e.to_string())),
        None => Ok(Vec::new()),
    }
}

fn finish(args: &ServeArgs, mode: Mode, clock: u64, events: usize) -> Outcome {
    println!("final mode {mode} at t = {clock} ms after {events} events");
    match &args.expect_mode {
        Some(want) if !want.eq_ignore_ascii_case(mode.as_str()) => Err(Failure::Runtime(format!(
            "expected mode {want}, ended in {mode}"
        ))),
        _ => Ok(()),
    }
}

pub fn run(flags: &Flags, args: &ServeArgs) -> Outcome {
    let mut session = session(flags)?;
    let mut commands = scenario(args)?;

    if args.headless {
        if let Some(n) = args.ticks {
            commands.retain(|c| c.t_ms <= n);
        }
        let events = replay(&mut session, &commands, args.ticks);
        if let Some(path) = &args.output {
            emit(Some(path), &to_jsonl(&events))?;
        }
        return finish(args, session.sim().mode(), session.clock(), events.len());
    }

    let config = ServerConfig {
        tcp_bind: args.bind.clone(),
        ws_bind: args.ws_bind.clone(),
        pacing: if args.lockstep {
            Pacing::Lockstep
        } else {
            Pacing::RealTime
        },
    };
    let handle = start(&config, session).map_err(|e| Failure::Usage(e.to_string()))?;
    eprintln!("listening on {}", handle.tcp_addr);
    if let Some(ws) = handle.ws_addr {
        eprintln!("websocket on ws://{ws}");
    }
    if commands.is_empty() {
        handle.wait();
        return Ok(());
    }

    // Feed the scenario as an ordinary client, so anyone else connected
    // watches it happen, and stop once every command has been answered.
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    let stream = TcpStream::connect(handle.tcp_addr).map_err(io)?;
    let mut writer = stream.try_clone().map_err(io)?;
    let mut pending: BTreeSet<u64> = commands.iter().map(|c| c.seq).collect();
    for c in &commands {
        writeln!(writer, "{}", c.to_line()).map_err(io)?;
    }
    let mut trace = String::new();
    let mut events = 0;
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    while !pending.is_empty() {
        line.clear();
        if reader.read_line(&mut line).map_err(io)? == 0 {
            return Err(Failure::Runtime("server closed the connection".into()));
        }
        let event: EventMessage =
            serde_json::from_str(line.trim_end()).map_err(|e| Failure::Runtime(e.to_string()))?;
        if event.is_terminal() {
            pending.remove(&event.seq);
        }
        trace.push_str(&line);
        events += 1;
    }
    let session = handle.shutdown();
    if let Some(path) = &args.output {
        emit(Some(path), &trace)?;
    }
    finish(args, session.sim().mode(), session.clock(), events)
}
