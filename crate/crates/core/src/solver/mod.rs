//! Deterministic depth-first branch-and-bound over the binary columns, and a
//! brute-force reference for small instances.
//!
//! The search always branches on the lowest-index unfixed binary column and
//! tries the one-branch first. A node is pruned when its combinatorial bound
//! does not exceed the incumbent, so results depend only on the instance,
//! the seed and the node budget.

mod brute;
mod flow;
mod heuristic;
mod propagate;

pub use brute::{brute_force, BruteError, BRUTE_MAX_AGENTS, BRUTE_MAX_STEPS, BRUTE_MAX_TASKS};
pub use flow::FlowNet;

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::encoder::{assignment_from_schedule, decode, Column, IlpInstance};
use crate::model::Schedule;
use crate::rational::{format_q, q, Q};
use crate::verify::occupancy;

use propagate::Engine;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_nodes: u64,
    /// Reported only; never changes the result.
    pub wall_clock: Option<Duration>,
}

impl SolveBudget {
    pub fn nodes(max_nodes: u64) -> Self {
        SolveBudget {
            max_nodes: max_nodes.max(1),
            wall_clock: None,
        }
    }
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget::nodes(100_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    BudgetExhausted,
    InfeasibleProven,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::BudgetExhausted => "BudgetExhausted",
            SolveStatus::InfeasibleProven => "InfeasibleProven",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub incumbent: Option<Schedule>,
    pub incumbent_value: Option<Q>,
    /// `None` when infeasibility was proven.
    pub best_bound: Option<Q>,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    /// Wall time spent, for reporting. Excluded from [`SolveResult::to_text`].
    pub elapsed: Duration,
}

impl SolveResult {
    /// Deterministic text form, also readable by the schedule parser.
    pub fn to_text(&self) -> String {
        let mut out = String::from("commsched-schedule 1\n");
        out.push_str(&format!("status {}\n", self.status.as_str()));
        if let Some(v) = &self.incumbent_value {
            out.push_str(&format!("value {}\n", format_q(v)));
        }
        if let Some(b) = &self.best_bound {
            out.push_str(&format!("bound {}\n", format_q(b)));
        }
        out.push_str(&format!("nodes {}\n", self.nodes_explored));
        if let Some(s) = &self.incumbent {
            out.push_str(&schedule_body(s));
        }
        out
    }
}

/// Placement and transfer lines shared by the result and schedule files.
pub fn schedule_body(s: &Schedule) -> String {
    let mut out = format!("makespan {}\n", s.makespan_steps);
    for p in &s.placements {
        out.push_str(&format!("place {} {} {}\n", p.agent, p.task, p.start));
    }
    for c in &s.comms {
        let bits: Vec<String> = c.bits.iter().map(format_q).collect();
        out.push_str(&format!(
            "comm {} {} {} {} {} {}\n",
            c.src,
            c.dst,
            c.task,
            c.start,
            c.end,
            bits.join(",")
        ));
    }
    out
}

impl fmt::Display for SolveResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self
            .incumbent_value
            .map(|v| format_q(&v))
            .unwrap_or_else(|| "-".into());
        let b = self
            .best_bound
            .map(|v| format_q(&v))
            .unwrap_or_else(|| "-".into());
        write!(
            f,
            "status {} value {} bound {} nodes {}",
            self.status.as_str(),
            v,
            b,
            self.nodes_explored
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("seed schedule is infeasible: {0}")]
    InfeasibleSeed(String),
}

struct TaskCols {
    /// (column, objective coefficient, completion step)
    cols: Vec<(usize, Q, u32)>,
    required: bool,
}

struct Search<'a> {
    inst: &'a IlpInstance,
    engine: Engine,
    tasks: Vec<TaskCols>,
    /// Weight of the makespan column in the objective (objective term is `-w * Z`).
    z_weight: Q,
    /// Non-X binary columns with positive objective coefficient.
    positive_other: Vec<(usize, Q)>,
    binaries: Vec<usize>,
    d_cols: Vec<bool>,
    incumbent: Option<(Q, Schedule)>,
}

impl Search<'_> {
    /// Upper bound on any completion of the current fixing.
    fn bound(&self) -> Q {
        let e = &self.engine;
        let mut b = e.fixed_obj;
        let mut horizon_floor = 0u32;
        for tc in &self.tasks {
            let mut placed = None;
            let mut best: Option<Q> = None;
            let mut earliest: Option<u32> = None;
            for &(c, coef, done) in &tc.cols {
                if e.lb[c] {
                    placed = Some(done);
                    break;
                }
                if e.ub[c] {
                    best = Some(best.map_or(coef, |x| x.max(coef)));
                    earliest = Some(earliest.map_or(done, |x| x.min(done)));
                }
            }
            match placed {
                Some(done) => horizon_floor = horizon_floor.max(done),
                None => {
                    let mut gain = best.unwrap_or_else(Q::zero);
                    if !tc.required {
                        gain = gain.max(Q::zero());
                    } else if let Some(done) = earliest {
                        horizon_floor = horizon_floor.max(done);
                    }
                    b += gain;
                }
            }
        }
        for (c, coef) in &self.positive_other {
            if !e.lb[*c] && e.ub[*c] {
                b += *coef;
            }
        }
        b - self.z_weight * q(horizon_floor as i128)
    }

    fn next_unfixed(&self, from: usize) -> Option<usize> {
        (from..self.binaries.len()).find(|&k| !self.engine.is_fixed(self.binaries[k]))
    }

    /// Completes a full binary fixing. Returns the column values when feasible.
    fn complete(&self) -> Option<Vec<Q>> {
        let inst = self.inst;
        let mut values: Vec<Q> = (0..inst.variables.len())
            .map(|c| {
                if self.engine.lb[c] {
                    Q::one()
                } else {
                    Q::zero()
                }
            })
            .collect();
        if inst.interference && !assign_rates(inst, &mut values) {
            return None;
        }
        if let Some(z) = inst.maps.z {
            let mut ms = 0;
            for tc in &self.tasks {
                for &(c, _, done) in &tc.cols {
                    if self.engine.lb[c] {
                        ms = ms.max(done);
                    }
                }
            }
            values[z] = q(ms as i128);
        }
        if inst.interference && inst.check(&values).is_err() {
            return None;
        }
        Some(values)
    }

    fn offer(&mut self, values: &[Q]) {
        let value = self.inst.objective_value(values);
        if self.incumbent.as_ref().is_some_and(|(v, _)| value <= *v) {
            return;
        }
        if let Ok(s) = decode(&self.inst.problem, self.inst, values) {
            self.incumbent = Some((value, s));
        }
    }
}

/// Fills `R` columns so every data arrival is backed by received bits within
/// link and channel capacities. Returns false when no such flow exists.
fn assign_rates(inst: &IlpInstance, values: &mut [Q]) -> bool {
    let p = &inst.problem;
    let maps = &inst.maps;
    let h = maps.steps;
    let dt = p.horizon.step_duration();
    let mut net = FlowNet::new(2);
    let (src, sink) = (0usize, 1usize);
    let mut set_nodes: std::collections::BTreeMap<(usize, u32), usize> = Default::default();
    let mut col_edges: Vec<(usize, usize)> = Vec::new();
    let mut demand = Q::zero();
    for i in 0..maps.agents {
        for t in 0..maps.tasks {
            let size = p.task(t).product_size;
            if size.is_zero() {
                continue;
            }
            let occ = inst.duration(i, t).map(occupancy);
            let mut deadline = None;
            for k in 0..h.saturating_sub(1) {
                if values[maps.d(i, t, k + 1)].is_one() && values[maps.d(i, t, k)].is_zero() {
                    let own = occ.is_some_and(|e| {
                        (0..=k).any(|tau| {
                            tau + e <= k + 1
                                && maps.x(i, t, tau).is_some_and(|x| values[x].is_one())
                        })
                    });
                    if !own {
                        deadline = Some(k);
                        break;
                    }
                }
            }
            let Some(last) = deadline else { continue };
            let req = net.add_node();
            net.add_edge(src, req, size);
            demand += size;
            for tau in 0..=last {
                for j in 0..maps.agents {
                    if j == i || !values[maps.c(j, i, t, tau)].is_one() {
                        continue;
                    }
                    let cap = p.bits_per_step(j, i, tau);
                    let target = match p.contacts.interference_set_of(j, i) {
                        Some(g) => *set_nodes.entry((g, tau)).or_insert_with(|| {
                            let node = net.add_node();
                            net.add_edge(
                                node,
                                sink,
                                p.contacts.interference[g].capacity[tau as usize] * dt,
                            );
                            node
                        }),
                        None => sink,
                    };
                    let e = net.add_edge(req, target, cap);
                    col_edges.push((maps.r(j, i, t, tau).expect("interference column"), e));
                }
            }
        }
    }
    if net.max_flow(src, sink) < demand {
        return false;
    }
    for (col, e) in col_edges {
        values[col] = net.flow(e);
    }
    true
}

struct Frame {
    cursor: usize,
    mark: usize,
    bound: Q,
    zero_done: bool,
}

/// Solves `inst` by branch-and-bound, starting from `seed` when given.
pub fn solve(
    inst: &IlpInstance,
    seed: Option<&Schedule>,
    budget: &SolveBudget,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let p = &inst.problem;
    let maps = &inst.maps;
    let mut engine = Engine::new(inst);

    let mut obj = vec![Q::zero(); inst.variables.len()];
    for (c, a) in &inst.objective {
        obj[*c] = *a;
    }
    let z_weight = maps.z.map(|z| -obj[z]).unwrap_or_else(Q::zero);

    let mut tasks: Vec<TaskCols> = (0..maps.tasks)
        .map(|t| TaskCols {
            cols: Vec::new(),
            required: p.task(t).required,
        })
        .collect();
    let mut d_cols = vec![false; inst.variables.len()];
    let mut binaries = Vec::new();
    let mut positive_other = Vec::new();
    for (c, role) in maps.roles().iter().enumerate() {
        match *role {
            Column::X { agent, task, step } => {
                let done = step + inst.duration(agent, task).unwrap_or(0);
                tasks[task].cols.push((c, obj[c], done));
                binaries.push(c);
            }
            Column::D { .. } => {
                d_cols[c] = true;
                binaries.push(c);
            }
            Column::C { .. } => {
                binaries.push(c);
                if obj[c] > Q::zero() {
                    positive_other.push((c, obj[c]));
                }
            }
            Column::R { .. } | Column::Z => {}
        }
    }

    // dominance: transfers that cannot help
    let mut root_ok = true;
    for i in 0..maps.agents {
        for j in 0..maps.agents {
            if i == j {
                continue;
            }
            for t in 0..maps.tasks {
                let useless =
                    p.task(t).product_size.is_zero() || p.network.successors(t).is_empty();
                for k in 0..maps.steps {
                    let c = maps.c(i, j, t, k);
                    if let Some(r) = maps.r(i, j, t, k) {
                        engine.set_gate(c, r);
                    }
                    engine.add_implication(maps.d(j, t, k), c);
                    if useless || p.bits_per_step(i, j, k).is_zero() {
                        root_ok &= engine.fix_zero(c);
                    }
                }
            }
        }
    }
    root_ok = root_ok && engine.initialize();

    let mut search = Search {
        inst,
        engine,
        tasks,
        z_weight,
        positive_other,
        binaries,
        d_cols,
        incumbent: None,
    };

    if let Some(seed) = seed {
        let values = assignment_from_schedule(inst, seed)
            .map_err(|e| SolveError::InfeasibleSeed(e.to_string()))?;
        inst.check(&values)
            .map_err(|e| SolveError::InfeasibleSeed(e.to_string()))?;
        let s = decode(p, inst, &values).map_err(|e| SolveError::InfeasibleSeed(e.to_string()))?;
        search.incumbent = Some((inst.objective_value(&values), s));
    }
    for cand in heuristic::candidates(p) {
        if let Ok(values) = assignment_from_schedule(inst, &cand) {
            if inst.check(&values).is_ok() {
                search.offer(&values);
            }
        }
    }

    let mut nodes = 0u64;
    let mut stack: Vec<Frame> = Vec::new();
    let mut exhausted = !root_ok;
    let mut cursor = 0usize;
    if root_ok {
        'node: loop {
            if nodes >= budget.max_nodes {
                break;
            }
            nodes += 1;
            let b = search.bound();
            let prune = search.incumbent.as_ref().is_some_and(|(v, _)| b <= *v);
            let mut branch = None;
            if !prune {
                let mut next = search.next_unfixed(cursor);
                let mut ok = true;
                while let Some(k) = next {
                    let c = search.binaries[k];
                    if search.d_cols[c] && search.engine.holding_is_free(c) {
                        if !(search.engine.fix_one(c) && search.engine.propagate()) {
                            ok = false;
                            break;
                        }
                        next = search.next_unfixed(k + 1);
                    } else {
                        break;
                    }
                }
                if ok {
                    match next {
                        None => {
                            if let Some(values) = search.complete() {
                                search.offer(&values);
                            }
                        }
                        Some(k) => branch = Some(k),
                    }
                }
            }
            if let Some(k) = branch {
                stack.push(Frame {
                    cursor: k,
                    mark: search.engine.mark(),
                    bound: b,
                    zero_done: false,
                });
                let c = search.binaries[k];
                if search.engine.fix_one(c) && search.engine.propagate() {
                    cursor = k + 1;
                    continue 'node;
                }
            }
            loop {
                let Some(top) = stack.last_mut() else {
                    exhausted = true;
                    break 'node;
                };
                search.engine.undo(top.mark);
                if top.zero_done {
                    stack.pop();
                    continue;
                }
                top.zero_done = true;
                let k = top.cursor;
                let c = search.binaries[k];
                if search.engine.fix_zero(c) && search.engine.propagate() {
                    cursor = k + 1;
                    continue 'node;
                }
            }
        }
    }

    if let Some((v, s)) = search.incumbent.as_mut() {
        if crate::verify::prune_unused_comms(p, s) {
            *v = (*v).max(s.objective_value);
        }
    }
    let incumbent_value = search.incumbent.as_ref().map(|(v, _)| *v);
    let (status, best_bound) = if exhausted {
        match incumbent_value {
            Some(v) => (SolveStatus::Optimal, Some(v)),
            None => (SolveStatus::InfeasibleProven, None),
        }
    } else {
        let open = stack.iter().map(|f| f.bound).max();
        let b = match (open, incumbent_value) {
            (Some(o), Some(v)) => Some(o.max(v)),
            (o, v) => o.or(v),
        };
        (SolveStatus::BudgetExhausted, b)
    };
    Ok(SolveResult {
        incumbent: search.incumbent.map(|(_, s)| s),
        incumbent_value,
        best_bound,
        status,
        nodes_explored: nodes,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::model::*;
    use crate::scenarios::{canned_scenario, parse_schedule};

    fn two_samples() -> ProblemInstance {
        let net = SoftwareNetwork::new(vec![
            Task::optional("s1", q(5)).owned_by("a"),
            Task::optional("s2", q(7)).owned_by("a"),
            Task::optional("big", q(20))
                .after(&["s1", "s2"])
                .owned_by("a"),
        ])
        .unwrap();
        let agents = vec![AgentProfile::new("a")
            .with_cost("s1", q(1), q(1))
            .with_cost("s2", q(1), q(1))
            .with_cost("big", q(2), q(1))];
        ProblemInstance::new(
            net,
            agents,
            ContactGraph::new(1, 3),
            Horizon::unit_steps(3),
            Objective::OptionalReward,
        )
        .unwrap()
    }

    #[test]
    fn finds_the_optimum_and_serializes() {
        let inst = encode(&two_samples(), false).unwrap();
        let r = solve(&inst, None, &SolveBudget::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.incumbent_value, Some(q(12)));
        assert_eq!(r.best_bound, r.incumbent_value);
        let parsed = parse_schedule(&r.to_text()).unwrap();
        assert_eq!(parsed.schedule.placements.len(), 2);
        assert!(r.to_string().starts_with("status Optimal value 12"));
    }

    #[test]
    fn tiny_budget_reports_exhaustion() {
        let p = canned_scenario("science_cluster")
            .unwrap()
            .to_problem()
            .unwrap();
        let inst = encode(&p, false).unwrap();
        let r = solve(&inst, None, &SolveBudget::nodes(1)).unwrap();
        assert!(r.nodes_explored <= 1);
        if r.status == SolveStatus::BudgetExhausted {
            assert!(r.best_bound >= r.incumbent_value);
        }
    }

    #[test]
    fn infeasible_seed_is_rejected() {
        let p = two_samples();
        let inst = encode(&p, false).unwrap();
        let bad = Schedule {
            placements: vec![
                Placement {
                    agent: "a".into(),
                    task: "s1".into(),
                    start: 0,
                },
                Placement {
                    agent: "a".into(),
                    task: "s2".into(),
                    start: 0,
                },
            ],
            ..Schedule::default()
        };
        assert!(matches!(
            solve(&inst, Some(&bad), &SolveBudget::default()),
            Err(SolveError::InfeasibleSeed(_))
        ));
    }

    #[test]
    fn proves_infeasibility() {
        let net = SoftwareNetwork::new(vec![
            Task::required("x").size(q(5)).owned_by("a"),
            Task::required("y").after(&["x"]).owned_by("b"),
        ])
        .unwrap();
        let agents = vec![
            AgentProfile::new("a").with_cost("x", q(1), q(1)),
            AgentProfile::new("b").with_cost("y", q(1), q(1)),
        ];
        let mut cg = ContactGraph::new(2, 3);
        cg.set_constant(0, 1, q(1));
        let p = ProblemInstance::new(net, agents, cg, Horizon::unit_steps(3), Objective::Makespan)
            .unwrap();
        let r = solve(&encode(&p, false).unwrap(), None, &SolveBudget::default()).unwrap();
        assert_eq!(r.status, SolveStatus::InfeasibleProven);
        assert!(r.incumbent.is_none() && r.best_bound.is_none());
    }
}
