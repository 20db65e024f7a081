//! Exhaustive reference optimizer over step-by-step joint actions.
//!
//! At every step each free agent either idles, starts a task whose inputs it
//! holds, or pairs with another free agent to transmit a product the receiver
//! lacks. With channel interference the bits credited per step are not fixed,
//! so arrivals are claimed explicitly and each claim set is checked against
//! the cut condition of the credit network (every subset of claims must fit
//! the capacity that can serve it).

use std::collections::HashMap;

use num_traits::Zero;
use thiserror::Error;

use crate::model::{BaseObjective, CommEvent, Placement, ProblemInstance, Schedule};
use crate::rational::{q, Q};
use crate::verify::{finalize, occupancy};

use super::flow::FlowNet;

pub const BRUTE_MAX_AGENTS: usize = 3;
pub const BRUTE_MAX_TASKS: usize = 5;
pub const BRUTE_MAX_STEPS: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteError {
    #[error(
        "instance too large for exhaustive search ({agents} agents, {tasks} tasks, {steps} steps)"
    )]
    TooLarge {
        agents: usize,
        tasks: usize,
        steps: u32,
    },
    #[error("no feasible schedule")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Act {
    Idle,
    Start(u8),
    Send(u8, u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    k: u32,
    busy_until: Vec<u32>,
    /// Step from which agent holds product; 0 once already held.
    known: Vec<Option<u32>>,
    received: Vec<Q>,
    scheduled: u32,
    makespan: u32,
    /// Interference mode: active transfer steps (src, dst, task, step) into
    /// products the receiver has not yet claimed, plus claimed arrivals.
    columns: Vec<(u8, u8, u8, u32)>,
    /// Claimed arrivals (receiver, task, step, bits over dedicated links).
    claims: Vec<(u8, u8, u32, Q)>,
}

struct Ctx<'a> {
    p: &'a ProblemInstance,
    n: usize,
    m: usize,
    h: u32,
    interference: bool,
    w_reward: Q,
    w_energy: Q,
    w_makespan: Q,
    memo: HashMap<State, Option<Q>>,
}

impl Ctx<'_> {
    fn knows(&self, st: &State, a: usize, t: usize) -> bool {
        st.known[a * self.m + t].is_some_and(|s| s <= st.k)
    }

    fn normalize(&self, st: &mut State) {
        for v in st.known.iter_mut() {
            if let Some(s) = v {
                if *s <= st.k {
                    *s = 0;
                }
            }
        }
        for b in st.busy_until.iter_mut() {
            if *b < st.k {
                *b = st.k;
            }
        }
        for (idx, v) in st.known.iter().enumerate() {
            if v.is_some() {
                st.received[idx] = Q::zero();
            }
        }
        // shared-channel steps into a product the receiver got otherwise no longer matter
        let (known, claims, m) = (&st.known, &st.claims, self.m);
        st.columns.retain(|&(_, dst, t, _)| {
            known[dst as usize * m + t as usize].is_none()
                || claims.iter().any(|c| c.0 == dst && c.1 == t)
        });
    }

    fn joint_actions(&self, st: &State) -> Vec<Vec<Act>> {
        let mut out = Vec::new();
        let mut acts = vec![Act::Idle; self.n];
        let mut used = vec![false; self.n];
        self.enumerate(st, 0, &mut acts, &mut used, st.scheduled, &mut out);
        out
    }

    fn enumerate(
        &self,
        st: &State,
        a: usize,
        acts: &mut Vec<Act>,
        used: &mut Vec<bool>,
        scheduled: u32,
        out: &mut Vec<Vec<Act>>,
    ) {
        if a == self.n {
            out.push(acts.clone());
            return;
        }
        let free = |x: usize, used: &Vec<bool>| !used[x] && st.busy_until[x] <= st.k;
        if !free(a, used) {
            self.enumerate(st, a + 1, acts, used, scheduled, out);
            return;
        }
        // idle (may still be picked as a receiver by a later sender)
        self.enumerate(st, a + 1, acts, used, scheduled, out);
        for t in 0..self.m {
            if scheduled & (1 << t) != 0 {
                continue;
            }
            let Some(c) = self.p.duration_steps(a, t) else {
                continue;
            };
            if st.k + c > self.h {
                continue;
            }
            if !self
                .p
                .network
                .pred_indices(t)
                .iter()
                .all(|&l| self.knows(st, a, l))
            {
                continue;
            }
            used[a] = true;
            acts[a] = Act::Start(t as u8);
            self.enumerate(st, a + 1, acts, used, scheduled | (1 << t), out);
            acts[a] = Act::Idle;
            used[a] = false;
        }
        for t in 0..self.m {
            if !self.knows(st, a, t)
                || self.p.task(t).product_size.is_zero()
                || self.p.network.successors(t).is_empty()
            {
                continue;
            }
            for j in 0..self.n {
                if j == a || !free(j, used) || st.known[j * self.m + t].is_some() {
                    continue;
                }
                if self.p.bits_per_step(a, j, st.k).is_zero() {
                    continue;
                }
                used[a] = true;
                used[j] = true;
                acts[a] = Act::Send(t as u8, j as u8);
                self.enumerate(st, a + 1, acts, used, scheduled, out);
                acts[a] = Act::Idle;
                used[a] = false;
                used[j] = false;
            }
        }
    }

    /// Applies one joint action; returns the immediate objective gain and the
    /// successor state before arrival claims.
    fn apply(&self, st: &State, acts: &[Act]) -> (Q, State) {
        let p = self.p;
        let k = st.k;
        let mut next = st.clone();
        let mut gain = Q::zero();
        for (a, act) in acts.iter().enumerate() {
            match *act {
                Act::Idle => {}
                Act::Start(t) => {
                    let t = t as usize;
                    let c = p.duration_steps(a, t).expect("allowed");
                    let e = occupancy(c);
                    next.scheduled |= 1 << t;
                    next.busy_until[a] = k + e;
                    next.makespan = next.makespan.max(k + c);
                    let ready = k + e;
                    let set = |next: &mut State, i: usize| {
                        let slot = &mut next.known[i * self.m + t];
                        if slot.is_none_or(|s| ready < s) {
                            *slot = Some(ready);
                        }
                    };
                    set(&mut next, a);
                    if p.task(t).product_size.is_zero() {
                        for i in 0..self.n {
                            set(&mut next, i);
                        }
                    }
                    let task = p.task(t);
                    gain += self.w_reward * task.effective_reward();
                    gain -= self.w_energy * p.cost(a, t).expect("allowed").energy;
                }
                Act::Send(t, j) => {
                    let (t, j) = (t as usize, j as usize);
                    gain -= self.w_energy * p.contacts.comm_energy(a, j) * p.bits_per_step(a, j, k);
                    if self.interference && p.contacts.interference_set_of(a, j).is_some() {
                        next.columns.push((a as u8, j as u8, t as u8, k));
                    } else {
                        let idx = j * self.m + t;
                        next.received[idx] += p.bits_per_step(a, j, k);
                        if next.received[idx] >= p.task(t).product_size {
                            let slot = &mut next.known[idx];
                            if slot.is_none_or(|s| k + 1 < s) {
                                *slot = Some(k + 1);
                            }
                        }
                    }
                }
            }
        }
        next.k = k + 1;
        (gain, next)
    }

    fn required_still_possible(&self, st: &State) -> bool {
        (0..self.m).all(|t| {
            !self.p.task(t).required
                || st.scheduled & (1 << t) != 0
                || (0..self.n).any(|a| {
                    self.p
                        .duration_steps(a, t)
                        .is_some_and(|c| st.k + c <= self.h)
                })
        })
    }

    /// Cut condition for the current claim set.
    fn claims_feasible(&self, claims: &[(u8, u8, u32, Q)], columns: &[(u8, u8, u8, u32)]) -> bool {
        let dedicated: Vec<Q> = claims.iter().map(|c| c.3).collect();
        let p = self.p;
        let dt = p.horizon.step_duration();
        let nq = claims.len();
        for mask in 1u32..(1 << nq) {
            let mut need = Q::zero();
            let mut free = Q::zero();
            for (bit, &(_, t, _, _)) in claims.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    need += p.task(t as usize).product_size;
                    free += dedicated[bit];
                }
            }
            let mut groups: std::collections::BTreeMap<(usize, u32), Q> = Default::default();
            for &(src, dst, t, tau) in columns {
                let served = claims.iter().enumerate().any(|(bit, &(j, tt, dl, _))| {
                    mask & (1 << bit) != 0 && j == dst && tt == t && tau < dl
                });
                if !served {
                    continue;
                }
                let r = p.bits_per_step(src as usize, dst as usize, tau);
                let g = p
                    .contacts
                    .interference_set_of(src as usize, dst as usize)
                    .expect("shared link");
                *groups.entry((g, tau)).or_insert_with(Q::zero) += r;
            }
            let mut supply = free;
            for ((g, tau), r) in groups {
                supply += r.min(p.contacts.interference[g].capacity[tau as usize] * dt);
            }
            if supply < need {
                return false;
            }
        }
        true
    }

    /// Successor states after optional arrival claims at the start of `st.k`.
    fn claim_options(&self, st: State) -> Vec<State> {
        if !self.interference || st.k == 0 {
            return vec![st];
        }
        let mut candidates = Vec::new();
        for j in 0..self.n {
            for t in 0..self.m {
                if st.known[j * self.m + t].is_some_and(|s| s <= st.k) {
                    continue;
                }
                let potential: Q = st
                    .columns
                    .iter()
                    .filter(|c| c.1 as usize == j && c.2 as usize == t)
                    .map(|c| self.p.bits_per_step(c.0 as usize, j, c.3))
                    .sum();
                let has_shared = !potential.is_zero();
                if has_shared
                    && potential + st.received[j * self.m + t] >= self.p.task(t).product_size
                {
                    candidates.push((j, t));
                }
            }
        }
        let mut out = Vec::new();
        for mask in (0u32..(1 << candidates.len())).rev() {
            let mut s = st.clone();
            for (bit, &(j, t)) in candidates.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    s.claims
                        .push((j as u8, t as u8, st.k, st.received[j * self.m + t]));
                    s.known[j * self.m + t] = Some(st.k);
                }
            }
            if mask != 0 && !self.claims_feasible(&s.claims, &s.columns) {
                continue;
            }
            out.push(s);
        }
        out
    }

    fn value(&mut self, mut st: State) -> Option<Q> {
        self.normalize(&mut st);
        if let Some(v) = self.memo.get(&st) {
            return *v;
        }
        let result = if st.k == self.h {
            let all_required =
                (0..self.m).all(|t| !self.p.task(t).required || st.scheduled & (1 << t) != 0);
            all_required.then(|| -self.w_makespan * q(st.makespan as i128))
        } else if !self.required_still_possible(&st) {
            None
        } else {
            let mut best: Option<Q> = None;
            for acts in self.joint_actions(&st) {
                let (gain, next) = self.apply(&st, &acts);
                for succ in self.claim_options(next) {
                    if let Some(v) = self.value(succ) {
                        let total = gain + v;
                        if best.is_none_or(|b| total > b) {
                            best = Some(total);
                        }
                    }
                }
            }
            best
        };
        self.memo.insert(st, result);
        result
    }
}

/// Exhaustively finds an optimal schedule. Among equal optima the one first
/// reached in enumeration order wins (earlier steps and lower agent indices
/// decide first, idling before starting before sending).
pub fn brute_force(p: &ProblemInstance, interference: bool) -> Result<Schedule, BruteError> {
    let (n, m, h) = (p.num_agents(), p.num_tasks(), p.steps());
    if n > BRUTE_MAX_AGENTS || m > BRUTE_MAX_TASKS || h > BRUTE_MAX_STEPS {
        return Err(BruteError::TooLarge {
            agents: n,
            tasks: m,
            steps: h,
        });
    }
    let mut w = [Q::zero(); 3];
    for (c, wt) in p.objective.components() {
        let idx = match c {
            BaseObjective::OptionalReward => 0,
            BaseObjective::Energy => 1,
            BaseObjective::Makespan => 2,
        };
        w[idx] += wt;
    }
    let mut ctx = Ctx {
        p,
        n,
        m,
        h,
        interference,
        w_reward: w[0],
        w_energy: w[1],
        w_makespan: w[2],
        memo: HashMap::new(),
    };
    let root = State {
        k: 0,
        busy_until: vec![0; n],
        known: vec![None; n * m],
        received: vec![Q::zero(); n * m],
        scheduled: 0,
        makespan: 0,
        columns: Vec::new(),
        claims: Vec::new(),
    };
    let best = ctx.value(root.clone()).ok_or(BruteError::Infeasible)?;

    // walk the optimal path
    let mut st = root;
    let mut target = best;
    let mut placements = Vec::new();
    let mut sends: Vec<(usize, usize, usize, u32)> = Vec::new();
    while st.k < h {
        ctx.normalize(&mut st);
        let mut chosen = None;
        'search: for acts in ctx.joint_actions(&st) {
            let (gain, next) = ctx.apply(&st, &acts);
            for succ in ctx.claim_options(next) {
                if let Some(v) = ctx.value(succ.clone()) {
                    if gain + v == target {
                        chosen = Some((acts, succ, v));
                        break 'search;
                    }
                }
            }
        }
        let (acts, succ, v) = chosen.expect("optimal path continues");
        for (a, act) in acts.iter().enumerate() {
            match *act {
                Act::Idle => {}
                Act::Start(t) => placements.push(Placement {
                    agent: p.agents[a].id.clone(),
                    task: p.task(t as usize).id.clone(),
                    start: st.k,
                }),
                Act::Send(t, j) => sends.push((a, j as usize, t as usize, st.k)),
            }
        }
        target = v;
        st = succ;
    }

    let bits = if interference {
        rates_for(p, &st, &sends)
    } else {
        sends
            .iter()
            .map(|&(i, j, _, k)| p.bits_per_step(i, j, k))
            .collect()
    };
    let mut order: Vec<usize> = (0..sends.len()).collect();
    order.sort_by_key(|&x| (sends[x].0, sends[x].1, sends[x].2, sends[x].3));
    let mut comms: Vec<CommEvent> = Vec::new();
    for x in order {
        let (i, j, t, k) = sends[x];
        if let Some(last) = comms.last_mut() {
            if last.src == p.agents[i].id
                && last.dst == p.agents[j].id
                && last.task == p.task(t).id
                && last.end == k
            {
                last.end = k + 1;
                last.bits.push(bits[x]);
                continue;
            }
        }
        comms.push(CommEvent {
            src: p.agents[i].id.clone(),
            dst: p.agents[j].id.clone(),
            task: p.task(t).id.clone(),
            start: k,
            end: k + 1,
            bits: vec![bits[x]],
        });
    }
    let mut s = Schedule {
        placements,
        comms,
        ..Schedule::empty()
    };
    finalize(p, &mut s);
    Ok(s)
}

/// Bits per transfer step realizing the claimed arrivals of the final state.
fn rates_for(p: &ProblemInstance, st: &State, sends: &[(usize, usize, usize, u32)]) -> Vec<Q> {
    let dt = p.horizon.step_duration();
    let mut net = FlowNet::new(2);
    let mut groups: std::collections::BTreeMap<(usize, u32), usize> = Default::default();
    let mut edge_of = vec![None; sends.len()];
    for &(j, t, dl, dedicated) in &st.claims {
        let node = net.add_node();
        net.add_edge(
            0,
            node,
            (p.task(t as usize).product_size - dedicated).max(Q::zero()),
        );
        for (x, &(src, dst, tt, tau)) in sends.iter().enumerate() {
            if dst != j as usize || tt != t as usize || tau >= dl {
                continue;
            }
            let Some(g) = p.contacts.interference_set_of(src, dst) else {
                continue;
            };
            let target = *groups.entry((g, tau)).or_insert_with(|| {
                let gn = net.add_node();
                net.add_edge(
                    gn,
                    1,
                    p.contacts.interference[g].capacity[tau as usize] * dt,
                );
                gn
            });
            edge_of[x] = Some(net.add_edge(node, target, p.bits_per_step(src, dst, tau)));
        }
    }
    net.max_flow(0, 1);
    edge_of
        .iter()
        .zip(sends)
        .map(|(e, &(src, dst, _, tau))| match e {
            Some(e) => net.flow(*e),
            None if p.contacts.interference_set_of(src, dst).is_none() => {
                p.bits_per_step(src, dst, tau)
            }
            None => Q::zero(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::rational::q;

    #[test]
    fn guard_and_simple_optimum() {
        let net = SoftwareNetwork::new(vec![Task::optional("t", q(4))]).unwrap();
        let agents = vec![AgentProfile::new("a").with_cost("t", q(1), q(1))];
        let p = ProblemInstance::new(
            net.clone(),
            agents.clone(),
            ContactGraph::new(1, 2),
            Horizon::unit_steps(2),
            Objective::OptionalReward,
        )
        .unwrap();
        assert_eq!(brute_force(&p, false).unwrap().objective_value, q(4));
        let long = ProblemInstance::new(
            net,
            agents,
            ContactGraph::new(1, 9),
            Horizon::unit_steps(9),
            Objective::OptionalReward,
        )
        .unwrap();
        assert!(matches!(
            brute_force(&long, false),
            Err(BruteError::TooLarge { steps: 9, .. })
        ));
    }

    #[test]
    fn reports_infeasible() {
        let net = SoftwareNetwork::new(vec![Task::required("t")]).unwrap();
        let agents = vec![AgentProfile::new("a").with_cost("t", q(3), q(1))];
        let p = ProblemInstance::new(
            net,
            agents,
            ContactGraph::new(1, 2),
            Horizon::unit_steps(2),
            Objective::Makespan,
        )
        .unwrap();
        assert_eq!(brute_force(&p, false), Err(BruteError::Infeasible));
    }
}
