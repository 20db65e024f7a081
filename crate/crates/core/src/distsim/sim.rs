use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::encoder::encode;
use crate::model::{CommEvent, Placement, ProblemInstance, Schedule, Task, TaskKind};
use crate::rational::{format_q, q, Q};
use crate::scenarios::{CostSource, PlanTask, ScenarioFile};
use crate::solver::{schedule_body, solve};

use super::{
    flood_within, quantize_rate, quantize_reward, state_bits, AgentState, EventKind, REWARD_SLOTS,
};

const HOLD_PREFIX: &str = "hold:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutedComm {
    pub comm: CommEvent,
    /// Empty when delivered.
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutedTask {
    pub agent: String,
    pub task: String,
    pub start: u32,
    /// Step at which the agent is free again.
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Missed {
    pub task: String,
    pub agent: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPlan {
    pub agent: String,
    pub view: Vec<String>,
    pub digest: String,
    pub status: String,
    pub value: Option<Q>,
    pub schedule: Option<Schedule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: u32,
    pub window_start: Q,
    pub snapshot: Q,
    pub disabled: Vec<String>,
    pub pool: Vec<String>,
    pub consensus_rounds: Option<u32>,
    pub flood_time: Q,
    pub plans: Vec<AgentPlan>,
    /// Agent pairs with identical views but different schedules.
    pub disagreements: Vec<(String, String)>,
    pub executed: Vec<ExecutedTask>,
    pub delivered: Vec<ExecutedComm>,
    pub dropped: Vec<ExecutedComm>,
    pub missed: Vec<Missed>,
    pub energy: Vec<(String, Q)>,
    pub carried: Vec<String>,
}

impl CycleRecord {
    pub fn consensus(&self) -> bool {
        self.consensus_rounds.is_some()
    }

    pub fn digests(&self) -> Vec<&str> {
        self.plans.iter().map(|p| p.digest.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecutionTrace {
    pub scenario: String,
    pub steps: u32,
    pub step_duration: Q,
    pub cycles: Vec<CycleRecord>,
}

impl ExecutionTrace {
    pub fn agreement_ok(&self) -> bool {
        self.cycles.iter().all(|c| c.disagreements.is_empty())
    }

    /// Executed tasks across all cycles, holdings excluded.
    pub fn executed_tasks(&self) -> Vec<&str> {
        self.cycles
            .iter()
            .flat_map(|c| c.executed.iter().map(|p| p.task.as_str()))
            .filter(|t| !is_hold(t))
            .collect()
    }

    /// Line records `cycle phase agent event payload`, `-` for no agent.
    pub fn to_text(&self) -> String {
        let mut o = String::from("commsched-trace 1\n");
        let _ = writeln!(
            o,
            "scenario {} steps {} dt {}",
            self.scenario,
            self.steps,
            format_q(&self.step_duration)
        );
        for c in &self.cycles {
            let n = c.cycle;
            let _ = writeln!(
                o,
                "{n} snapshot - window start={} snapshot={}",
                format_q(&c.window_start),
                format_q(&c.snapshot)
            );
            for a in &c.disabled {
                let _ = writeln!(o, "{n} snapshot {a} disabled");
            }
            let _ = writeln!(o, "{n} snapshot - pool {}", list(&c.pool));
            let state = match c.consensus_rounds {
                Some(r) => format!("complete rounds={r}"),
                None => "incomplete".into(),
            };
            let _ = writeln!(
                o,
                "{n} broadcast - consensus {state} time={}",
                format_q(&c.flood_time)
            );
            for p in &c.plans {
                let _ = writeln!(o, "{n} broadcast {} view {}", p.agent, list(&p.view));
            }
            for p in &c.plans {
                let v = p.value.map(|v| format_q(&v)).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    o,
                    "{n} plan {} digest {} status={} value={v}",
                    p.agent, p.digest, p.status
                );
            }
            if c.disagreements.is_empty() {
                let _ = writeln!(o, "{n} plan - agreement ok");
            }
            for (a, b) in &c.disagreements {
                let _ = writeln!(o, "{n} plan - disagreement {a} {b}");
            }
            for p in &c.executed {
                let _ = writeln!(
                    o,
                    "{n} execute {} run {} {} {}",
                    p.agent, p.task, p.start, p.end
                );
            }
            for d in &c.delivered {
                let m = &d.comm;
                let _ = writeln!(
                    o,
                    "{n} execute {} send {} {} {} {}",
                    m.src, m.task, m.dst, m.start, m.end
                );
            }
            for d in &c.dropped {
                let m = &d.comm;
                let _ = writeln!(
                    o,
                    "{n} execute {} drop {} {} {} {} {}",
                    m.src, m.task, m.dst, m.start, m.end, d.reason
                );
            }
            for m in &c.missed {
                let _ = writeln!(
                    o,
                    "{n} execute {} miss {} {}",
                    m.agent.as_deref().unwrap_or("-"),
                    m.task,
                    m.reason
                );
            }
            for (a, e) in &c.energy {
                let _ = writeln!(o, "{n} execute {a} energy {}", format_q(e));
            }
            let _ = writeln!(o, "{n} carry - pending {}", list(&c.carried));
        }
        o
    }
}

fn list(v: &[String]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

pub fn digest(s: Option<&Schedule>) -> String {
    match s {
        Some(s) => hex::encode(Sha256::digest(schedule_body(s).as_bytes())),
        None => "none".into(),
    }
}

struct World<'a> {
    s: &'a ScenarioFile,
}

impl World<'_> {
    fn enabled(&self, agent: usize, t: Q) -> bool {
        let id = &self.s.agents[agent].id;
        let mut on = true;
        for e in self.s.script.events().iter().filter(|e| e.time <= t) {
            match &e.kind {
                EventKind::Disable(a) if a == id => on = false,
                EventKind::Enable(a) if a == id => on = true,
                _ => {}
            }
        }
        on
    }

    /// Enabled throughout `[from, to)`.
    fn enabled_over(&self, agent: usize, from: Q, to: Q) -> bool {
        let id = &self.s.agents[agent].id;
        self.enabled(agent, from)
            && !self.s.script.events().iter().any(|e| {
                e.time > from && e.time < to && matches!(&e.kind, EventKind::Disable(a) if a == id)
            })
    }

    fn in_zone(&self, agent: usize, t: Q) -> bool {
        let id = &self.s.agents[agent].id;
        let mut inside = self.s.agents[agent].science;
        for e in self.s.script.events().iter().filter(|e| e.time <= t) {
            match &e.kind {
                EventKind::ZoneEnter(a) if a == id => inside = true,
                EventKind::ZoneExit(a) if a == id => inside = false,
                _ => {}
            }
        }
        inside
    }
}

fn prefixed(cycle: u32, id: &str) -> String {
    format!("c{cycle}.{id}")
}

pub fn is_hold(task: &str) -> bool {
    task.starts_with(HOLD_PREFIX)
}

fn hold_id(task: &str) -> String {
    if task.starts_with(HOLD_PREFIX) {
        task.to_string()
    } else {
        format!("{HOLD_PREFIX}{task}")
    }
}

/// Fresh copies of the template tasks for `cycle`; collection tasks only
/// for owners inside a science zone at `t`.
fn fresh_tasks(world: &World, cycle: u32, t: Q) -> Vec<PlanTask> {
    let s = world.s;
    let zone_ok = |task: &Task| {
        task.kind != TaskKind::Collect
            || task
                .owner
                .as_deref()
                .and_then(|o| s.agent_index(o))
                .is_none_or(|a| world.in_zone(a, t))
    };
    let mut keep: BTreeSet<&str> = BTreeSet::new();
    loop {
        let before = keep.len();
        for task in &s.tasks {
            if zone_ok(task) && task.predecessors.iter().all(|p| keep.contains(p.as_str())) {
                keep.insert(&task.id);
            }
        }
        if keep.len() == before {
            break;
        }
    }
    s.tasks
        .iter()
        .filter(|task| keep.contains(task.id.as_str()))
        .map(|task| {
            let mut copy = task.clone();
            copy.id = prefixed(cycle, &task.id);
            copy.predecessors = task
                .predecessors
                .iter()
                .map(|p| prefixed(cycle, p))
                .collect();
            PlanTask {
                task: copy,
                source: CostSource::Template(task.id.clone()),
            }
        })
        .collect()
}

/// The part of the pool an agent knowing `known` can plan.
fn view_tasks(s: &ScenarioFile, pool: &[PlanTask], known: &[usize]) -> Vec<PlanTask> {
    let ids: BTreeSet<&str> = known.iter().map(|&a| s.agents[a].id.as_str()).collect();
    let runnable = |pt: &PlanTask| match &pt.source {
        CostSource::Pinned(h) => ids.contains(h.as_str()),
        CostSource::Template(t) => s
            .costs
            .iter()
            .any(|c| &c.task == t && ids.contains(c.agent.as_str())),
    };
    let mut included: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = included.len();
        for pt in pool {
            if included.contains(&pt.task.id) {
                continue;
            }
            let owner_ok = pt
                .task
                .owner
                .as_ref()
                .is_none_or(|o| ids.contains(o.as_str()));
            if owner_ok && runnable(pt) && pt.task.predecessors.iter().all(|p| included.contains(p))
            {
                included.insert(pt.task.id.clone());
            }
        }
        if included.len() == before {
            break;
        }
    }
    pool.iter()
        .filter(|pt| included.contains(&pt.task.id))
        .cloned()
        .collect()
}

fn agent_state(s: &ScenarioFile, i: usize, pool: &[PlanTask], start: Q, known: Q) -> AgentState {
    let id = &s.agents[i].id;
    let n = s.agents.len();
    let bandwidth_levels = (0..n)
        .map(|j| quantize_rate(s.rate(i, j, 0, start, known)))
        .collect();
    let capability = s.costs.iter().filter(|c| &c.agent == id).count().min(7) as u8;
    let mut reward_levels = [0u8; REWARD_SLOTS];
    let owned: Vec<&PlanTask> = pool
        .iter()
        .filter(|pt| pt.task.owner.as_deref() == Some(id.as_str()))
        .collect();
    for (slot, pt) in reward_levels
        .iter_mut()
        .zip(owned.iter().filter(|pt| !pt.task.required))
    {
        *slot = quantize_reward(pt.task.reward);
    }
    let held_products = pool
        .iter()
        .filter(|pt| matches!(&pt.source, CostSource::Pinned(h) if h == id))
        .map(|pt| pt.task.id.clone())
        .collect();
    AgentState {
        agent: id.clone(),
        bandwidth_levels,
        capability,
        reward_levels,
        owned_tasks: owned.iter().map(|pt| pt.task.id.clone()).collect(),
        held_products,
    }
}

struct Planned {
    plan: AgentPlan,
    problem: Option<ProblemInstance>,
}

fn plan_for(
    s: &ScenarioFile,
    agent: usize,
    known: &[usize],
    pool: &[PlanTask],
    start: Q,
    snap: Q,
    interference: bool,
) -> Planned {
    let view: Vec<String> = known.iter().map(|&a| s.agents[a].id.clone()).collect();
    let mut plan = AgentPlan {
        agent: s.agents[agent].id.clone(),
        view,
        digest: digest(None),
        status: String::new(),
        value: None,
        schedule: None,
    };
    let tasks = view_tasks(s, pool, known);
    let problem = match s.build_instance(known, &tasks, start, snap) {
        Ok(p) => p,
        Err(_) => {
            plan.status = "invalid".into();
            return Planned {
                plan,
                problem: None,
            };
        }
    };
    let inst = match encode(&problem, interference) {
        Ok(i) => i,
        Err(_) => {
            plan.status = "infeasible".into();
            return Planned {
                plan,
                problem: Some(problem),
            };
        }
    };
    match solve(&inst, None, &s.config.budget) {
        Ok(r) => {
            plan.status = r.status.as_str().to_string();
            plan.value = r.incumbent_value;
            plan.digest = digest(r.incumbent.as_ref());
            plan.schedule = r.incumbent;
        }
        Err(e) => plan.status = format!("error:{e}"),
    }
    Planned {
        plan,
        problem: Some(problem),
    }
}

struct Execution {
    executed: Vec<ExecutedTask>,
    delivered: Vec<ExecutedComm>,
    dropped: Vec<ExecutedComm>,
    missed: Vec<Missed>,
    energy: BTreeMap<usize, Q>,
    /// Agents holding each executed task's product at the end of the window.
    holders: BTreeMap<String, Vec<usize>>,
}

enum Action<'a> {
    Run(&'a Placement, &'a ProblemInstance),
    Send(&'a CommEvent, &'a ProblemInstance),
}

fn execute(
    world: &World,
    planned: &BTreeMap<usize, Planned>,
    pool: &[PlanTask],
    done: &BTreeSet<String>,
    start: Q,
) -> Execution {
    let s = world.s;
    let dt = s.step_duration();
    let at = |k: u32| start + dt * q(k as i128);
    let window_end = start + s.config.execute_s;
    let truth_known = start + s.horizon_seconds;
    let mut actions: Vec<(u32, u8, usize, Action)> = Vec::new();
    for (&a, pl) in planned {
        let (Some(sched), Some(p)) = (&pl.plan.schedule, &pl.problem) else {
            continue;
        };
        let me = &s.agents[a].id;
        for pm in sched.placements.iter().filter(|pm| &pm.agent == me) {
            actions.push((pm.start, 0, a, Action::Run(pm, p)));
        }
        for c in sched.comms.iter().filter(|c| &c.src == me) {
            actions.push((c.start, 1, a, Action::Send(c, p)));
        }
    }
    actions.sort_by_key(|(k, kind, a, _)| (*k, *kind, *a));
    let sizes: BTreeMap<&str, Q> = pool
        .iter()
        .map(|pt| (pt.task.id.as_str(), pt.task.product_size))
        .collect();
    let mut avail: BTreeMap<(usize, String), u32> = BTreeMap::new();
    let mut global: BTreeMap<String, u32> = BTreeMap::new();
    let has = |avail: &BTreeMap<(usize, String), u32>,
               global: &BTreeMap<String, u32>,
               a: usize,
               t: &str,
               k: u32| {
        avail.get(&(a, t.to_string())).is_some_and(|&x| x <= k)
            || global.get(t).is_some_and(|&x| x <= k)
    };
    let mut ex = Execution {
        executed: Vec::new(),
        delivered: Vec::new(),
        dropped: Vec::new(),
        missed: Vec::new(),
        energy: BTreeMap::new(),
        holders: BTreeMap::new(),
    };
    let mut ran: BTreeSet<String> = done.clone();
    for (k, _, a, action) in actions {
        match action {
            Action::Run(pm, p) => {
                let (Some(la), Some(lt)) = (p.agent_index(&pm.agent), p.network.index_of(&pm.task))
                else {
                    continue;
                };
                let c = p.duration_steps(la, lt).unwrap_or(0);
                let e = c.max(1);
                let reason = if ran.contains(&pm.task) {
                    Some("duplicate")
                } else if !world.enabled_over(a, at(k), at(k + e)) {
                    Some("agent-disabled")
                } else if at(k + c) > window_end {
                    Some("window-closed")
                } else if !p
                    .task(lt)
                    .predecessors
                    .iter()
                    .all(|pr| has(&avail, &global, a, pr, k))
                {
                    Some("missing-input")
                } else {
                    None
                };
                if let Some(r) = reason {
                    ex.missed.push(Missed {
                        task: pm.task.clone(),
                        agent: Some(pm.agent.clone()),
                        reason: r.into(),
                    });
                    continue;
                }
                ran.insert(pm.task.clone());
                *ex.energy.entry(a).or_insert_with(|| q(0)) +=
                    p.cost(la, lt).map(|c| c.energy).unwrap_or_else(|| q(0));
                if sizes.get(pm.task.as_str()).is_some_and(|z| *z == q(0)) {
                    global.insert(pm.task.clone(), k + e);
                }
                avail.insert((a, pm.task.clone()), k + e);
                ex.holders.entry(pm.task.clone()).or_default().push(a);
                ex.executed.push(ExecutedTask {
                    agent: pm.agent.clone(),
                    task: pm.task.clone(),
                    start: pm.start,
                    end: k + e,
                });
            }
            Action::Send(cm, p) => {
                let Some(dst) = s.agent_index(&cm.dst) else {
                    continue;
                };
                let mut reason = None;
                if !has(&avail, &global, a, &cm.task, k) {
                    reason = Some("no-product");
                } else if !world.enabled_over(a, at(cm.start), at(cm.end))
                    || !world.enabled_over(dst, at(cm.start), at(cm.end))
                {
                    reason = Some("agent-disabled");
                } else if at(cm.end) > window_end {
                    reason = Some("window-closed");
                } else {
                    for (off, bits) in cm.bits.iter().enumerate() {
                        let step = cm.start + off as u32;
                        if *bits > s.rate(a, dst, step, start, truth_known) * dt {
                            reason = Some("link-lost");
                            break;
                        }
                    }
                }
                let rec = ExecutedComm {
                    comm: cm.clone(),
                    reason: reason.unwrap_or("").to_string(),
                };
                if reason.is_some() {
                    ex.dropped.push(rec);
                    continue;
                }
                let per_bit = match (p.agent_index(&cm.src), p.agent_index(&cm.dst)) {
                    (Some(x), Some(y)) => p.contacts.comm_energy(x, y),
                    _ => q(0),
                };
                *ex.energy.entry(a).or_insert_with(|| q(0)) += per_bit * cm.total_bits();
                let key = (dst, cm.task.clone());
                let t = avail.get(&key).copied().map_or(cm.end, |x| x.min(cm.end));
                avail.insert(key, t);
                let h = ex.holders.entry(cm.task.clone()).or_default();
                if !h.contains(&dst) {
                    h.push(dst);
                }
                ex.delivered.push(rec);
            }
        }
    }
    ex
}

/// Missed required work plus everything it still needs, with executed
/// inputs replaced by pinned holdings.
fn carry_over(
    world: &World,
    pool: &[PlanTask],
    ex: &Execution,
    done: &BTreeSet<String>,
    end: Q,
) -> Vec<PlanTask> {
    let s = world.s;
    let executed: BTreeSet<&str> = ex.executed.iter().map(|p| p.task.as_str()).collect();
    let by_id: BTreeMap<&str, &PlanTask> =
        pool.iter().map(|pt| (pt.task.id.as_str(), pt)).collect();
    let mut needed: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = pool
        .iter()
        .filter(|pt| {
            pt.task.required
                && !executed.contains(pt.task.id.as_str())
                && !done.contains(&pt.task.id)
        })
        .map(|pt| pt.task.id.as_str())
        .collect();
    while let Some(t) = stack.pop() {
        if !needed.insert(t) {
            continue;
        }
        for p in &by_id[t].task.predecessors {
            if !executed.contains(p.as_str()) && by_id.contains_key(p.as_str()) {
                stack.push(p);
            }
        }
    }
    let mut holds: BTreeMap<String, PlanTask> = BTreeMap::new();
    let mut out = Vec::new();
    for pt in pool
        .iter()
        .filter(|pt| needed.contains(pt.task.id.as_str()))
    {
        let mut pt = pt.clone();
        let mut preds = Vec::new();
        for p in &pt.task.predecessors {
            if !executed.contains(p.as_str()) {
                preds.push(p.clone());
                continue;
            }
            let hid = hold_id(p);
            let holders = &ex.holders[p.as_str()];
            let holder = holders
                .iter()
                .copied()
                .find(|&h| world.enabled(h, end))
                .unwrap_or(holders[0]);
            let holder_id = s.agents[holder].id.clone();
            holds.entry(hid.clone()).or_insert_with(|| PlanTask {
                task: Task::required(&hid)
                    .size(by_id[p.as_str()].task.product_size)
                    .owned_by(&holder_id),
                source: CostSource::Pinned(holder_id),
            });
            preds.push(hid);
        }
        pt.task.predecessors = Vec::new();
        pt.task = pt.task.after(&preds);
        out.push(pt);
    }
    holds.into_values().chain(out).collect()
}

/// Runs `num_cycles` broadcast-plan-execute cycles of the scenario.
/// Mission time 0 is the start of the first execution window; cycle `c`
/// executes from `c * total` and takes its snapshot `broadcast + plan`
/// seconds earlier.
pub fn run_cycles(s: &ScenarioFile, num_cycles: u32, interference: bool) -> ExecutionTrace {
    let world = World { s };
    let cfg = &s.config;
    let n = s.agents.len();
    let bits = state_bits(n);
    let mut trace = ExecutionTrace {
        scenario: s.name.clone(),
        steps: s.steps,
        step_duration: s.step_duration(),
        cycles: Vec::new(),
    };
    let mut carried: Vec<PlanTask> = Vec::new();
    let mut done: BTreeSet<String> = BTreeSet::new();
    for cycle in 0..num_cycles {
        let start = cfg.total() * q(cycle as i128);
        let snap = start - cfg.plan_s - cfg.broadcast_s;
        let mut pool = carried.clone();
        pool.extend(fresh_tasks(&world, cycle, snap));
        let live: Vec<bool> = (0..n).map(|a| world.enabled(a, snap)).collect();
        let states: Vec<Option<AgentState>> = (0..n)
            .map(|a| live[a].then(|| agent_state(s, a, &pool, start, snap)))
            .collect();
        let links: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| i != j && (0..s.steps).any(|k| s.rate(i, j, k, start, snap) > q(0)))
                    .collect()
            })
            .collect();
        let out = flood_within(
            &states,
            |_, i, j| links[i][j],
            n as u32,
            Some((cfg.broadcast_s, bits, cfg.flood_rate_bps)),
        );
        let planned: BTreeMap<usize, Planned> = (0..n)
            .filter(|&a| live[a])
            .map(|a| {
                let known: Vec<usize> = (0..n).filter(|&m| out.views[a][m].is_some()).collect();
                (a, plan_for(s, a, &known, &pool, start, snap, interference))
            })
            .collect();
        let mut disagreements = Vec::new();
        for (&a, pa) in &planned {
            for (&b, pb) in planned.range(a + 1..) {
                if pa.plan.view == pb.plan.view && pa.plan.digest != pb.plan.digest {
                    disagreements.push((s.agents[a].id.clone(), s.agents[b].id.clone()));
                }
            }
        }
        let ex = execute(&world, &planned, &pool, &done, start);
        let planned_ids: BTreeSet<&str> = planned
            .values()
            .filter_map(|p| p.plan.schedule.as_ref())
            .flat_map(|sc| sc.placements.iter().map(|pm| pm.task.as_str()))
            .collect();
        let executed_ids: BTreeSet<&str> = ex.executed.iter().map(|p| p.task.as_str()).collect();
        let mut missed = ex.missed.clone();
        for pt in &pool {
            let id = pt.task.id.as_str();
            if pt.task.required && !planned_ids.contains(id) && !executed_ids.contains(id) {
                missed.push(Missed {
                    task: id.to_string(),
                    agent: None,
                    reason: "unplanned".into(),
                });
            }
        }
        let next = carry_over(&world, &pool, &ex, &done, start + cfg.execute_s);
        done.extend(
            ex.executed
                .iter()
                .filter(|p| !is_hold(&p.task))
                .map(|p| p.task.clone()),
        );
        trace.cycles.push(CycleRecord {
            cycle,
            window_start: start,
            snapshot: snap,
            disabled: (0..n)
                .filter(|&a| !live[a])
                .map(|a| s.agents[a].id.clone())
                .collect(),
            pool: pool.iter().map(|pt| pt.task.id.clone()).collect(),
            consensus_rounds: out.rounds_used,
            flood_time: out.elapsed(bits, cfg.flood_rate_bps),
            plans: planned.into_values().map(|p| p.plan).collect(),
            disagreements,
            executed: ex.executed.clone(),
            delivered: ex.delivered.clone(),
            dropped: ex.dropped.clone(),
            missed,
            energy: ex
                .energy
                .iter()
                .map(|(&a, e)| (s.agents[a].id.clone(), *e))
                .collect(),
            carried: next.iter().map(|pt| pt.task.id.clone()).collect(),
        });
        carried = next;
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{canned_scenario, parse_scenario};

    const OUTAGE: &str = "\
commsched-scenario 1
name outage
horizon 6 6
AGENTS
a
b base
END
TASKS
t1 required size=1 owner=a
t2 required after=t1 owner=a
END
COSTS
a t1 1 1
a t2 2 2
END
CONTACTS
a <-> b 1
END
CONFIG
execute 6
budget 500
END
SCRIPT
1 disable a
5 enable a
END
";

    #[test]
    fn relay_routes_through_the_middle() {
        let t = run_cycles(&canned_scenario("relay").unwrap(), 1, false);
        let c = &t.cycles[0];
        assert!(c.consensus() && t.agreement_ok());
        let hops: Vec<(&str, &str)> = c
            .delivered
            .iter()
            .map(|d| (d.comm.src.as_str(), d.comm.dst.as_str()))
            .collect();
        assert_eq!(hops, vec![("a", "r"), ("r", "b")]);
        assert!(c
            .executed
            .iter()
            .any(|p| p.task == "c0.store" && p.agent == "b"));
    }

    #[test]
    fn mule_stores_then_forwards() {
        let t = run_cycles(&canned_scenario("data_mule").unwrap(), 1, false);
        let c = &t.cycles[0];
        let to_mule = c.delivered.iter().find(|d| d.comm.dst == "m").unwrap();
        let to_base = c
            .delivered
            .iter()
            .find(|d| d.comm.src == "m" && d.comm.dst == "b")
            .unwrap();
        assert!(to_mule.comm.end <= 4 && to_base.comm.start >= 4);
    }

    #[test]
    fn disabled_agent_work_returns_to_the_pool() {
        let s = parse_scenario(OUTAGE).unwrap();
        let t = run_cycles(&s, 2, false);
        let first = &t.cycles[0];
        assert!(first.executed.iter().any(|p| p.task == "c0.t1"));
        assert!(first
            .missed
            .iter()
            .any(|m| m.task == "c0.t2" && m.reason == "agent-disabled"));
        assert_eq!(
            first.carried,
            vec!["hold:c0.t1".to_string(), "c0.t2".to_string()]
        );
        let second = &t.cycles[1];
        assert!(second.pool.contains(&"c0.t2".to_string()));
        assert!(second.executed.iter().any(|p| p.task == "c0.t2"));
        assert!(second.carried.is_empty());
    }

    #[test]
    fn replay_is_byte_identical_and_tasks_run_once() {
        for name in ["relay", "assembly_line"] {
            let s = canned_scenario(name).unwrap();
            let a = run_cycles(&s, 3, false);
            assert_eq!(a.to_text(), run_cycles(&s, 3, false).to_text());
            let mut seen = BTreeSet::new();
            for task in a.executed_tasks() {
                assert!(seen.insert(task), "{task} executed twice");
            }
        }
    }

    #[test]
    fn absent_link_partitions_views() {
        let text = OUTAGE
            .replace("a <-> b 1", "")
            .replace("1 disable a\n5 enable a\n", "");
        let t = run_cycles(&parse_scenario(&text).unwrap(), 1, false);
        let c = &t.cycles[0];
        assert!(!c.consensus());
        assert_eq!(c.plans[0].view, vec!["a".to_string()]);
        assert!(c.executed.iter().any(|p| p.task == "c0.t2"));
    }
}
