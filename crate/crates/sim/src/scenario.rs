//! Scenario files: one command message per line, replayed without a socket.

use std::path::Path;

use crate::protocol::{parse_command, CommandMessage, EventMessage};
use crate::session::Session;
use crate::SimError;

/// Upper bound on how long a replay waits for the last motion to finish.
pub const SETTLE_LIMIT_TICKS: u64 = 120_000;

pub fn parse_scenario(text: &str) -> Result<Vec<CommandMessage>, SimError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_command(line).map_err(|(_, msg)| SimError::Scenario {
                line: i + 1,
                message: msg,
            })
        })
        .collect()
}

pub fn load_scenario(path: &Path) -> Result<Vec<CommandMessage>, SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Runs every command in order. Afterwards the clock is advanced to
/// `until_tick` if given, otherwise until the simulator is idle.
pub fn replay(
    session: &mut Session,
    commands: &[CommandMessage],
    until_tick: Option<u64>,
) -> Vec<EventMessage> {
    let mut out = Vec::new();
    for cmd in commands {
        out.extend(session.submit(cmd));
    }
    match until_tick {
        Some(t) => out.extend(session.advance_to(t)),
        None => out.extend(session.settle(SETTLE_LIMIT_TICKS)),
    }
    out
}

/// Serialises events as JSON lines.
pub fn to_jsonl(events: &[EventMessage]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&e.to_line());
        s.push('\n');
    }
    s
}
