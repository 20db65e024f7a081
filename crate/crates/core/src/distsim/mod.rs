//! Simulation of the broadcast-plan-execute protocol: state flooding in
//! synchronous rounds, independent per-agent planning and execution
//! against a scripted world.

mod script;
mod sim;

pub use script::{CycleConfig, EventKind, ScriptEvent, WorldScript};
pub use sim::{
    digest, is_hold, run_cycles, AgentPlan, CycleRecord, ExecutedComm, ExecutedTask,
    ExecutionTrace, Missed,
};

use crate::rational::{q, Q};

pub const BANDWIDTH_BITS: usize = 3;
pub const CAPABILITY_BITS: usize = 3;
pub const REWARD_SLOTS: usize = 10;
pub const REWARD_BITS: usize = 2;

/// What one agent broadcasts at the start of a cycle. Only the quantized
/// fields count toward the message size; ownership and holdings travel
/// with the state as identifiers already known to every agent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgentState {
    pub agent: String,
    /// One level per agent in the system, 0 = no link.
    pub bandwidth_levels: Vec<u8>,
    pub capability: u8,
    pub reward_levels: [u8; REWARD_SLOTS],
    pub owned_tasks: Vec<String>,
    pub held_products: Vec<String>,
}

/// Eight-level logarithmic quantizer for link rates in bits per second.
pub fn quantize_rate(bps: Q) -> u8 {
    let steps = [
        q(1_000),
        q(10_000),
        q(100_000),
        q(1_000_000),
        q(5_000_000),
        q(10_000_000),
    ];
    if bps <= q(0) {
        return 0;
    }
    1 + steps.iter().filter(|s| bps >= **s).count() as u8
}

pub fn quantize_reward(r: Q) -> u8 {
    if r <= q(0) {
        0
    } else if r <= q(5) {
        1
    } else if r <= q(10) {
        2
    } else {
        3
    }
}

impl AgentState {
    pub fn size_bits(&self) -> usize {
        self.bandwidth_levels.len() * BANDWIDTH_BITS + CAPABILITY_BITS + REWARD_SLOTS * REWARD_BITS
    }

    /// Packed quantized fields, most significant bit first.
    pub fn encode(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.size_bits());
        let mut push = |v: u8, width: usize| {
            for b in (0..width).rev() {
                bits.push(v >> b & 1 == 1);
            }
        };
        for &l in &self.bandwidth_levels {
            push(l.min(7), BANDWIDTH_BITS);
        }
        push(self.capability.min(7), CAPABILITY_BITS);
        for &r in &self.reward_levels {
            push(r.min(3), REWARD_BITS);
        }
        bits
    }

    /// Inverse of [`AgentState::encode`] for the quantized fields.
    pub fn decode(agent: &str, n: usize, bits: &[bool]) -> Option<AgentState> {
        if bits.len() != n * BANDWIDTH_BITS + CAPABILITY_BITS + REWARD_SLOTS * REWARD_BITS {
            return None;
        }
        let mut it = bits.iter();
        let mut take =
            |width: usize| (0..width).fold(0u8, |acc, _| acc << 1 | *it.next().unwrap() as u8);
        let bandwidth_levels = (0..n).map(|_| take(BANDWIDTH_BITS)).collect();
        let capability = take(CAPABILITY_BITS);
        let mut reward_levels = [0u8; REWARD_SLOTS];
        for r in reward_levels.iter_mut() {
            *r = take(REWARD_BITS);
        }
        Some(AgentState {
            agent: agent.to_string(),
            bandwidth_levels,
            capability,
            reward_levels,
            ..Default::default()
        })
    }
}

/// Message size of one state in an `n`-agent system.
pub fn state_bits(n: usize) -> u64 {
    3 * n as u64 + 23
}

/// Upper bound on flooding time: every one of `n` states crosses at most
/// `n - 1` hops, each serialized at `rate_bps`.
pub fn flooding_time_bound(n: usize, rate_bps: Q) -> Q {
    let n = n as i128;
    q(n * (n - 1) * (3 * n + 23)) / rate_bps
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodOutcome {
    /// `views[i][m]` is the state of agent `m` as held by agent `i`.
    pub views: Vec<Vec<Option<AgentState>>>,
    /// First round after which every participant held every state.
    pub rounds_used: Option<u32>,
    /// Largest number of messages sent over a single link, per round run.
    pub round_loads: Vec<u32>,
}

impl FloodOutcome {
    pub fn complete(&self) -> bool {
        self.rounds_used.is_some()
    }

    /// Wall-clock time of the rounds run, links working in parallel.
    pub fn elapsed(&self, message_bits: u64, rate_bps: Q) -> Q {
        let msgs: u32 = self.round_loads.iter().sum();
        q(msgs as i128 * message_bits as i128) / rate_bps
    }
}

#[derive(Clone)]
struct Flooder {
    views: Vec<Vec<Option<AgentState>>>,
    /// `sent[i][m][j]`: agent `i` already forwarded message `m` to `j`.
    sent: Vec<Vec<Vec<bool>>>,
    live: Vec<bool>,
}

impl Flooder {
    fn new(states: &[Option<AgentState>]) -> Self {
        let n = states.len();
        let mut views = vec![vec![None; n]; n];
        for (i, s) in states.iter().enumerate() {
            views[i][i] = s.clone();
        }
        Flooder {
            views,
            sent: vec![vec![vec![false; n]; n]; n],
            live: states.iter().map(Option::is_some).collect(),
        }
    }

    fn complete(&self) -> bool {
        let n = self.live.len();
        (0..n).filter(|&i| self.live[i]).all(|i| {
            (0..n)
                .filter(|&m| self.live[m])
                .all(|m| self.views[i][m].is_some())
        })
    }

    fn round(&mut self, r: u32, avail: &impl Fn(u32, usize, usize) -> bool) -> u32 {
        let n = self.live.len();
        let before = self.views.clone();
        let mut max_load = 0;
        for i in (0..n).filter(|&i| self.live[i]) {
            for j in (0..n).filter(|&j| j != i && self.live[j]) {
                if !avail(r, i, j) {
                    continue;
                }
                let mut load = 0;
                for m in 0..n {
                    if let Some(s) = &before[i][m] {
                        if m != j && !self.sent[i][m][j] {
                            self.sent[i][m][j] = true;
                            load += 1;
                            if self.views[j][m].is_none() {
                                self.views[j][m] = Some(s.clone());
                            }
                        }
                    }
                }
                max_load = max_load.max(load);
            }
        }
        max_load
    }
}

/// Floods the present states (`None` marks an absent agent) for up to
/// `rounds` synchronous rounds. `avail(r, i, j)` says whether link `i -> j`
/// works in round `r`. Stops early once every view is complete.
pub fn flood(
    states: &[Option<AgentState>],
    avail: impl Fn(u32, usize, usize) -> bool,
    rounds: u32,
) -> FloodOutcome {
    flood_within(states, avail, rounds, None)
}

/// Like [`flood`], but a round is only run if the accumulated time stays
/// within `deadline = (seconds, message_bits, rate_bps)`.
pub fn flood_within(
    states: &[Option<AgentState>],
    avail: impl Fn(u32, usize, usize) -> bool,
    rounds: u32,
    deadline: Option<(Q, u64, Q)>,
) -> FloodOutcome {
    let mut f = Flooder::new(states);
    let mut loads = Vec::new();
    let mut rounds_used = f.complete().then_some(0);
    let mut spent = q(0);
    for r in 0..rounds {
        if rounds_used.is_some() {
            break;
        }
        let saved = f.clone();
        let load = f.round(r, &avail);
        if let Some((limit, bits, rate)) = deadline {
            let t = q(load as i128 * bits as i128) / rate;
            if spent + t > limit {
                f = saved;
                break;
            }
            spent += t;
        }
        loads.push(load);
        if f.complete() {
            rounds_used = Some(r + 1);
        }
    }
    FloodOutcome {
        views: f.views,
        rounds_used,
        round_loads: loads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn states(n: usize) -> Vec<Option<AgentState>> {
        (0..n)
            .map(|i| {
                Some(AgentState {
                    agent: format!("a{i}"),
                    bandwidth_levels: vec![0; n],
                    ..Default::default()
                })
            })
            .collect()
    }

    #[test]
    fn bound_values() {
        assert_eq!(flooding_time_bound(10, q(5000)), qf(954, 1000));
        assert_eq!(
            flooding_time_bound(50, q(1_000_000)),
            qf(423_850, 1_000_000)
        );
        assert_eq!(flooding_time_bound(2, q(29)), q(2));
    }

    #[test]
    fn state_size_law() {
        for n in 1..20 {
            let s = AgentState {
                bandwidth_levels: vec![5; n],
                capability: 3,
                ..Default::default()
            };
            assert_eq!(s.size_bits() as u64, state_bits(n));
            assert_eq!(s.encode().len(), s.size_bits());
            let back = AgentState::decode("", n, &s.encode()).unwrap();
            assert_eq!(back.bandwidth_levels, s.bandwidth_levels);
            assert_eq!(back.capability, 3);
        }
    }

    #[test]
    fn complete_graph_takes_one_round() {
        let out = flood(&states(6), |_, _, _| true, 10);
        assert_eq!(out.rounds_used, Some(1));
    }

    #[test]
    fn line_takes_n_minus_one_rounds() {
        let n = 7;
        let out = flood(&states(n), |_, i, j| i.abs_diff(j) == 1, 20);
        assert_eq!(out.rounds_used, Some(n as u32 - 1));
        let partial = flood(&states(n), |_, i, j| i.abs_diff(j) == 1, 3);
        assert!(!partial.complete());
        assert!(partial.views[0][3].is_some() && partial.views[0][4].is_none());
    }

    #[test]
    fn absent_agents_are_ignored() {
        let mut s = states(3);
        s[1] = None;
        let out = flood(&s, |_, _, _| true, 5);
        assert_eq!(out.rounds_used, Some(1));
        assert!(out.views[0][1].is_none());
    }

    #[test]
    fn deadline_stops_flooding() {
        let n = 5;
        let bits = state_bits(n);
        let out = flood_within(
            &states(n),
            |_, i, j| i.abs_diff(j) == 1,
            10,
            Some((q(2 * bits as i128), bits, q(1))),
        );
        assert_eq!(out.round_loads.len(), 2);
        assert!(!out.complete());
    }

    #[test]
    fn quantizers() {
        assert_eq!(quantize_rate(q(0)), 0);
        assert_eq!(quantize_rate(q(1)), 1);
        assert_eq!(quantize_rate(q(11_000_000)), 7);
        assert_eq!(quantize_reward(q(20)), 3);
    }
}
