use std::fmt;

use crate::rational::{format_q, q, Q};
use crate::solver::SolveBudget;

/// Phase lengths of one broadcast-plan-execute cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleConfig {
    pub broadcast_s: Q,
    pub plan_s: Q,
    pub execute_s: Q,
    pub budget: SolveBudget,
    /// Link rate used to serialize state messages while flooding.
    pub flood_rate_bps: Q,
}

impl CycleConfig {
    pub fn total(&self) -> Q {
        self.broadcast_s + self.plan_s + self.execute_s
    }
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            broadcast_s: q(5),
            plan_s: q(10),
            execute_s: q(30),
            budget: SolveBudget::nodes(20_000),
            flood_rate_bps: q(5000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Sets the rate of the link in both directions.
    LinkRate {
        a: String,
        b: String,
        bps: Q,
    },
    /// No communication on the link in either direction.
    LinkCut {
        a: String,
        b: String,
    },
    /// Drops any override so the link follows the contact model again.
    LinkRestore {
        a: String,
        b: String,
    },
    Disable(String),
    Enable(String),
    ZoneEnter(String),
    ZoneExit(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptEvent {
    /// Mission-clock seconds; 0 is the start of the first execution window.
    pub time: Q,
    pub kind: EventKind,
    /// Forecast events are known to planners ahead of time.
    pub forecast: bool,
}

impl fmt::Display for ScriptEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", format_q(&self.time))?;
        match &self.kind {
            EventKind::LinkRate { a, b, bps } => write!(f, "rate {a} {b} {}", format_q(bps))?,
            EventKind::LinkCut { a, b } => write!(f, "cut {a} {b}")?,
            EventKind::LinkRestore { a, b } => write!(f, "restore {a} {b}")?,
            EventKind::Disable(a) => write!(f, "disable {a}")?,
            EventKind::Enable(a) => write!(f, "enable {a}")?,
            EventKind::ZoneEnter(a) => write!(f, "zone-enter {a}")?,
            EventKind::ZoneExit(a) => write!(f, "zone-exit {a}")?,
        }
        if self.forecast {
            write!(f, " forecast")?;
        }
        Ok(())
    }
}

/// Timed world events, kept sorted by time (stable for equal times).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldScript {
    events: Vec<ScriptEvent>,
}

impl WorldScript {
    pub fn new(mut events: Vec<ScriptEvent>) -> Self {
        events.sort_by(|a, b| a.time.cmp(&b.time));
        WorldScript { events }
    }

    pub fn events(&self) -> &[ScriptEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events a planner with knowledge cut-off `known_until` sees as having
    /// happened by time `t`.
    pub fn visible(&self, t: Q, known_until: Q) -> impl Iterator<Item = &ScriptEvent> {
        self.events
            .iter()
            .filter(move |e| e.time <= t && (e.forecast || e.time <= known_until))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: i128, forecast: bool) -> ScriptEvent {
        ScriptEvent {
            time: q(t),
            kind: EventKind::Disable("a".into()),
            forecast,
        }
    }

    #[test]
    fn events_sorted_and_filtered() {
        let s = WorldScript::new(vec![ev(5, false), ev(1, false), ev(3, true)]);
        let times: Vec<Q> = s.events().iter().map(|e| e.time).collect();
        assert_eq!(times, vec![q(1), q(3), q(5)]);
        let seen: Vec<Q> = s.visible(q(4), q(2)).map(|e| e.time).collect();
        assert_eq!(seen, vec![q(1), q(3)]);
        assert_eq!(s.visible(q(10), q(0)).count(), 1);
    }

    #[test]
    fn display_and_total() {
        assert_eq!(ev(3, true).to_string(), "3 disable a forecast");
        assert_eq!(CycleConfig::default().total(), q(45));
    }
}
