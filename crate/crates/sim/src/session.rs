//! A simulator plus its telemetry clock. The headless replay and both
//! socket front ends drive the simulation through this type, so they emit
//! identical event streams for identical command streams.

use crate::protocol::{CommandMessage, Event, EventMessage};
use crate::state::Simulator;

pub struct Session {
    sim: Simulator,
}

impl Session {
    pub fn new(sim: Simulator) -> Self {
        Self { sim }
    }

    pub fn sim(&self) -> &Simulator {
        &self.sim
    }

    pub fn clock(&self) -> u64 {
        self.sim.tick_count()
    }

    /// One tick, followed by a periodic snapshot when one is due.
    pub fn tick(&mut self) -> Vec<EventMessage> {
        let mut out = self.sim.step();
        let period = self.sim.config().telemetry_period_ms;
        let tick = self.sim.tick_count();
        if period > 0 && tick % period == 0 {
            out.push(EventMessage {
                event: Event::StateSnapshot(self.sim.snapshot()),
                seq: 0,
                t_ms: tick,
            });
        }
        out
    }

    /// Ticks until the clock reads `t_ms`.
    pub fn advance_to(&mut self, t_ms: u64) -> Vec<EventMessage> {
        let mut out = Vec::new();
        while self.clock() < t_ms {
            out.extend(self.tick());
        }
        out
    }

    /// Advances to the command's timestamp (if it lies ahead) and applies it.
    pub fn submit(&mut self, msg: &CommandMessage) -> Vec<EventMessage> {
        let mut out = self.advance_to(msg.t_ms);
        out.extend(self.sim.apply(msg));
        out
    }

    /// Ticks until nothing is moving, at most `limit` ticks.
    pub fn settle(&mut self, limit: u64) -> Vec<EventMessage> {
        let mut out = Vec::new();
        let stop = self.clock() + limit;
        while !self.sim.is_idle() && self.clock() < stop {
            out.extend(self.tick());
        }
        out
    }
}
