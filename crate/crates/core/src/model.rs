//! Domain types for the communication-aware task scheduling problem: tasks and
//! their dependency network, heterogeneous agents, the time-varying contact
//! graph, the discretized horizon and the schedules produced by the solvers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{ceil_u32, format_q, q, Q};

pub type AgentId = String;
pub type TaskId = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate task id `{0}`")]
    DuplicateTask(TaskId),
    #[error("task `{task}` lists unknown predecessor `{pred}`")]
    UnknownPredecessor { task: TaskId, pred: TaskId },
    #[error("cyclic dependency through {0:?}")]
    CyclicDependency(Vec<TaskId>),
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(AgentId),
    #[error("agent `{agent}` has a cost entry for unknown task `{task}`")]
    UnknownCostTask { agent: AgentId, task: TaskId },
    #[error("task `{task}` is owned by unknown agent `{agent}`")]
    UnknownOwner { task: TaskId, agent: AgentId },
    #[error("contact graph shape {found:?} does not match {expected:?} (agents, steps)")]
    ContactShape {
        expected: (usize, u32),
        found: (usize, u32),
    },
    #[error("horizon must have a positive length and at least one step")]
    BadHorizon,
    #[error("link {0}->{1} appears in more than one interference set")]
    OverlappingInterference(usize, usize),
    #[error("interference link {0}->{1} is not a valid inter-agent link")]
    BadInterferenceLink(usize, usize),
}

/// Role a task plays in science accounting. Scheduling treats every kind the
/// same; the baseline and the comparison metrics use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum TaskKind {
    #[default]
    Generic,
    Collect,
    Analyze,
    Store,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Generic => "generic",
            TaskKind::Collect => "collect",
            TaskKind::Analyze => "analyze",
            TaskKind::Store => "store",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "generic" => TaskKind::Generic,
            "collect" => TaskKind::Collect,
            "analyze" => TaskKind::Analyze,
            "store" => TaskKind::Store,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub required: bool,
    /// Only meaningful for optional tasks; required tasks contribute nothing.
    pub reward: Q,
    /// Size of the data product in bits.
    pub product_size: Q,
    pub predecessors: Vec<TaskId>,
    /// The agent a required task belongs to, if any.
    pub owner: Option<AgentId>,
    pub kind: TaskKind,
}

impl Task {
    pub fn required(id: impl Into<TaskId>) -> Self {
        Task {
            id: id.into(),
            required: true,
            reward: Q::zero(),
            product_size: Q::zero(),
            predecessors: Vec::new(),
            owner: None,
            kind: TaskKind::Generic,
        }
    }

    pub fn optional(id: impl Into<TaskId>, reward: Q) -> Self {
        Task {
            required: false,
            reward,
            ..Task::required(id)
        }
    }

    pub fn size(mut self, bits: Q) -> Self {
        self.product_size = bits;
        self
    }

    pub fn after<S: AsRef<str>>(mut self, preds: &[S]) -> Self {
        self.predecessors
            .extend(preds.iter().map(|p| p.as_ref().to_string()));
        self.predecessors.sort();
        self.predecessors.dedup();
        self
    }

    pub fn owned_by(mut self, agent: impl Into<AgentId>) -> Self {
        self.owner = Some(agent.into());
        self
    }

    pub fn kind(mut self, kind: TaskKind) -> Self {
        self.kind = kind;
        self
    }

    /// Reward as counted by the objective: zero for required tasks.
    pub fn effective_reward(&self) -> Q {
        if self.required {
            Q::zero()
        } else {
            self.reward
        }
    }
}

/// The task dependency network. Tasks are stored in canonical order:
/// topological with ties broken by id when the network is acyclic, plain id
/// order otherwise (so that a cyclic network can still be reported on).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftwareNetwork {
    tasks: Vec<Task>,
    index: BTreeMap<TaskId, usize>,
}

impl SoftwareNetwork {
    pub fn new(tasks: Vec<Task>) -> Result<Self, ModelError> {
        let mut by_id: BTreeMap<TaskId, Task> = BTreeMap::new();
        for t in tasks {
            if by_id.contains_key(&t.id) {
                return Err(ModelError::DuplicateTask(t.id));
            }
            by_id.insert(t.id.clone(), t);
        }
        for t in by_id.values() {
            for p in &t.predecessors {
                if !by_id.contains_key(p) {
                    return Err(ModelError::UnknownPredecessor {
                        task: t.id.clone(),
                        pred: p.clone(),
                    });
                }
            }
        }
        let order = kahn_order(&by_id).unwrap_or_else(|_| by_id.keys().cloned().collect());
        let mut tasks = Vec::with_capacity(order.len());
        for id in order {
            tasks.push(by_id.remove(&id).expect("id from map"));
        }
        let index = tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        Ok(SoftwareNetwork { tasks, index })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Task> {
        self.index_of(id).map(|i| &self.tasks[i])
    }

    /// Predecessor indices of task `t`, ascending.
    pub fn pred_indices(&self, t: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.tasks[t]
            .predecessors
            .iter()
            .map(|p| self.index[p])
            .collect();
        v.sort_unstable();
        v
    }

    /// Returns one dependency cycle (as a closed walk of ids) if any exists.
    pub fn find_cycle(&self) -> Option<Vec<TaskId>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let n = self.tasks.len();
        let mut color = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(
            u: usize,
            net: &SoftwareNetwork,
            color: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<TaskId>> {
            color[u] = 1;
            stack.push(u);
            for p in net.pred_indices(u) {
                if color[p] == 1 {
                    let pos = stack.iter().position(|&x| x == p).expect("on stack");
                    let mut cyc: Vec<TaskId> = stack[pos..]
                        .iter()
                        .map(|&i| net.tasks[i].id.clone())
                        .collect();
                    cyc.push(net.tasks[p].id.clone());
                    return Some(cyc);
                }
                if color[p] == 0 {
                    if let Some(c) = dfs(p, net, color, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            color[u] = 2;
            None
        }
        for u in 0..n {
            if color[u] == 0 {
                if let Some(c) = dfs(u, self, &mut color, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// All transitive predecessors of `t`.
    pub fn ancestors(&self, t: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo = self.pred_indices(t);
        while let Some(p) = todo.pop() {
            if seen.insert(p) {
                todo.extend(self.pred_indices(p));
            }
        }
        seen
    }

    pub fn successors(&self, t: usize) -> Vec<usize> {
        (0..self.tasks.len())
            .filter(|&s| self.pred_indices(s).contains(&t))
            .collect()
    }
}

fn kahn_order(tasks: &BTreeMap<TaskId, Task>) -> Result<Vec<TaskId>, ModelError> {
    let mut indeg: BTreeMap<&str, usize> = tasks.keys().map(|k| (k.as_str(), 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in tasks.values() {
        *indeg.get_mut(t.id.as_str()).expect("known") = t.predecessors.len();
        for p in &t.predecessors {
            succ.entry(p.as_str()).or_default().push(t.id.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(k, _)| *k)
        .collect();
    let mut out = Vec::with_capacity(tasks.len());
    while let Some(&next) = ready.iter().next() {
        ready.remove(next);
        out.push(next.to_string());
        if let Some(ss) = succ.get(next) {
            for s in ss {
                let d = indeg.get_mut(s).expect("known");
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
    }
    if out.len() != tasks.len() {
        let stuck: Vec<TaskId> = indeg
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(k, _)| k.to_string())
            .collect();
        return Err(ModelError::CyclicDependency(stuck));
    }
    Ok(out)
}

/// Canonical task order: every task after its predecessors, ties broken by id.
pub fn topological_order(sn: &SoftwareNetwork) -> Result<Vec<TaskId>, ModelError> {
    if let Some(cycle) = sn.find_cycle() {
        return Err(ModelError::CyclicDependency(cycle));
    }
    Ok(sn.tasks.iter().map(|t| t.id.clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCost {
    /// Seconds.
    pub time: Q,
    pub energy: Q,
}

impl TaskCost {
    pub fn new(time: Q, energy: Q) -> Self {
        TaskCost { time, energy }
    }
}

/// A computing agent. A task without a cost entry is forbidden on the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentProfile {
    pub id: AgentId,
    pub costs: BTreeMap<TaskId, TaskCost>,
    pub base_station: bool,
}

impl AgentProfile {
    pub fn new(id: impl Into<AgentId>) -> Self {
        AgentProfile {
            id: id.into(),
            costs: BTreeMap::new(),
            base_station: false,
        }
    }

    pub fn base_station(mut self) -> Self {
        self.base_station = true;
        self
    }

    pub fn with_cost(mut self, task: impl Into<TaskId>, time: Q, energy: Q) -> Self {
        self.costs.insert(task.into(), TaskCost::new(time, energy));
        self
    }

    pub fn cost(&self, task: &str) -> Option<&TaskCost> {
        self.costs.get(task)
    }

    pub fn allows(&self, task: &str) -> bool {
        self.costs.contains_key(task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rate {
    Finite(Q),
    Infinite,
}

/// Per-step rates of one directed link, as consumed by [`comm_duration`].
#[derive(Debug, Clone, Copy)]
pub enum RateProfile<'a> {
    SelfLoop,
    Steps(&'a [Q]),
}

/// A group of directed links sharing one channel, with its capacity in bits
/// per second for every step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceSet {
    pub links: Vec<(usize, usize)>,
    pub capacity: Vec<Q>,
}

/// Time-varying, bandwidth-limited directed communication graph. Rates are in
/// bits per second and piecewise constant per step. Self-loops are infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactGraph {
    agents: usize,
    steps: u32,
    rates: Vec<Q>,
    comm_energy: Vec<Q>,
    pub interference: Vec<InterferenceSet>,
}

impl ContactGraph {
    pub fn new(agents: usize, steps: u32) -> Self {
        ContactGraph {
            agents,
            steps,
            rates: vec![Q::zero(); agents * agents * steps as usize],
            comm_energy: vec![Q::zero(); agents * agents],
            interference: Vec::new(),
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    fn at(&self, i: usize, j: usize, k: u32) -> usize {
        (i * self.agents + j) * self.steps as usize + k as usize
    }

    pub fn set_rate(&mut self, i: usize, j: usize, k: u32, bps: Q) {
        let idx = self.at(i, j, k);
        self.rates[idx] = bps;
    }

    pub fn set_constant(&mut self, i: usize, j: usize, bps: Q) {
        for k in 0..self.steps {
            self.set_rate(i, j, k, bps);
        }
    }

    /// Sets the rate in both directions for every step.
    pub fn set_symmetric(&mut self, i: usize, j: usize, bps: Q) {
        self.set_constant(i, j, bps);
        self.set_constant(j, i, bps);
    }

    pub fn rate(&self, i: usize, j: usize, k: u32) -> Rate {
        if i == j {
            Rate::Infinite
        } else {
            Rate::Finite(self.rates[self.at(i, j, k)])
        }
    }

    /// Finite rate of an inter-agent link; zero for self-loops, which never
    /// need an explicit transfer.
    pub fn link_rate(&self, i: usize, j: usize, k: u32) -> Q {
        if i == j {
            Q::zero()
        } else {
            self.rates[self.at(i, j, k)]
        }
    }

    pub fn profile(&self, i: usize, j: usize) -> RateProfile<'_> {
        if i == j {
            RateProfile::SelfLoop
        } else {
            let s = self.at(i, j, 0);
            RateProfile::Steps(&self.rates[s..s + self.steps as usize])
        }
    }

    /// Energy charged per transmitted bit on link `i -> j` (default 0).
    pub fn comm_energy(&self, i: usize, j: usize) -> Q {
        self.comm_energy[i * self.agents + j]
    }

    pub fn set_comm_energy(&mut self, i: usize, j: usize, per_bit: Q) {
        self.comm_energy[i * self.agents + j] = per_bit;
    }

    /// Index of the interference set containing link `i -> j`, if any.
    pub fn interference_set_of(&self, i: usize, j: usize) -> Option<usize> {
        self.interference
            .iter()
            .position(|s| s.links.contains(&(i, j)))
    }

    fn check_interference(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for s in &self.interference {
            for &(i, j) in &s.links {
                if i == j || i >= self.agents || j >= self.agents {
                    return Err(ModelError::BadInterferenceLink(i, j));
                }
                if !seen.insert((i, j)) {
                    return Err(ModelError::OverlappingInterference(i, j));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Horizon {
    /// Seconds.
    pub wall_clock: Q,
    pub num_steps: u32,
}

impl Horizon {
    pub fn new(wall_clock: Q, num_steps: u32) -> Result<Self, ModelError> {
        if num_steps == 0 || wall_clock <= Q::zero() {
            return Err(ModelError::BadHorizon);
        }
        Ok(Horizon {
            wall_clock,
            num_steps,
        })
    }

    /// One second per step.
    pub fn unit_steps(num_steps: u32) -> Self {
        Horizon {
            wall_clock: q(num_steps as i128),
            num_steps,
        }
    }

    pub fn step_duration(&self) -> Q {
        self.wall_clock / q(self.num_steps as i128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseObjective {
    OptionalReward,
    Makespan,
    Energy,
}

impl BaseObjective {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaseObjective::OptionalReward => "reward",
            BaseObjective::Makespan => "makespan",
            BaseObjective::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    OptionalReward,
    Makespan,
    Energy,
    /// Non-negative weights, at least one positive.
    Weighted(Vec<(BaseObjective, Q)>),
}

impl Objective {
    /// The objective as a list of weighted base components.
    pub fn components(&self) -> Vec<(BaseObjective, Q)> {
        match self {
            Objective::OptionalReward => vec![(BaseObjective::OptionalReward, q(1))],
            Objective::Makespan => vec![(BaseObjective::Makespan, q(1))],
            Objective::Energy => vec![(BaseObjective::Energy, q(1))],
            Objective::Weighted(w) => w.clone(),
        }
    }

    pub fn weights_valid(&self) -> bool {
        let c = self.components();
        c.iter().all(|(_, w)| !w.is_negative()) && c.iter().any(|(_, w)| w.is_positive())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::OptionalReward => "reward",
            Objective::Makespan => "makespan",
            Objective::Energy => "energy",
            Objective::Weighted(_) => "weighted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub network: SoftwareNetwork,
    pub agents: Vec<AgentProfile>,
    pub contacts: ContactGraph,
    pub horizon: Horizon,
    pub objective: Objective,
}

impl ProblemInstance {
    pub fn new(
        network: SoftwareNetwork,
        agents: Vec<AgentProfile>,
        contacts: ContactGraph,
        horizon: Horizon,
        objective: Objective,
    ) -> Result<Self, ModelError> {
        let mut ids = BTreeSet::new();
        for a in &agents {
            if !ids.insert(a.id.clone()) {
                return Err(ModelError::DuplicateAgent(a.id.clone()));
            }
            for t in a.costs.keys() {
                if network.index_of(t).is_none() {
                    return Err(ModelError::UnknownCostTask {
                        agent: a.id.clone(),
                        task: t.clone(),
                    });
                }
            }
        }
        for t in network.tasks() {
            if let Some(o) = &t.owner {
                if !ids.contains(o) {
                    return Err(ModelError::UnknownOwner {
                        task: t.id.clone(),
                        agent: o.clone(),
                    });
                }
            }
        }
        if horizon.num_steps == 0 || horizon.wall_clock <= Q::zero() {
            return Err(ModelError::BadHorizon);
        }
        if contacts.agents() != agents.len() || contacts.steps() != horizon.num_steps {
            return Err(ModelError::ContactShape {
                expected: (agents.len(), horizon.num_steps),
                found: (contacts.agents(), contacts.steps()),
            });
        }
        contacts.check_interference()?;
        Ok(ProblemInstance {
            network,
            agents,
            contacts,
            horizon,
            objective,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.network.len()
    }

    pub fn steps(&self) -> u32 {
        self.horizon.num_steps
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn task(&self, t: usize) -> &Task {
        &self.network.tasks()[t]
    }

    pub fn cost(&self, agent: usize, task: usize) -> Option<&TaskCost> {
        self.agents[agent].cost(&self.task(task).id)
    }

    /// Duration of `task` on `agent` in whole steps, `None` when forbidden.
    pub fn duration_steps(&self, agent: usize, task: usize) -> Option<u32> {
        self.cost(agent, task)
            .map(|c| discretize_cost(&c.time, &self.horizon))
    }

    /// Bits `i` can push to `j` during step `k`.
    pub fn bits_per_step(&self, i: usize, j: usize, k: u32) -> Q {
        self.contacts.link_rate(i, j, k) * self.horizon.step_duration()
    }

    pub fn with_objective(&self, objective: Objective) -> Self {
        let mut p = self.clone();
        p.objective = objective;
        p
    }
}

/// `ceil(seconds / step_duration)`. Zero-second tasks map to zero steps; they
/// still occupy their start slot when scheduled.
pub fn discretize_cost(seconds: &Q, horizon: &Horizon) -> u32 {
    if seconds.is_negative() {
        return 0;
    }
    ceil_u32(&(seconds / horizon.step_duration()))
}

/// Number of whole steps needed to push `size` bits over a link starting at
/// `start_step`, or `None` if the horizon ends first.
pub fn comm_duration(
    size: &Q,
    profile: RateProfile<'_>,
    start_step: u32,
    step_duration: &Q,
) -> Option<u32> {
    if !size.is_positive() {
        return Some(0);
    }
    let rates = match profile {
        RateProfile::SelfLoop => return Some(0),
        RateProfile::Steps(r) => r,
    };
    let mut sent = Q::zero();
    for (offset, rate) in rates.iter().enumerate().skip(start_step as usize) {
        sent += rate * step_duration;
        if sent >= *size {
            return Some(offset as u32 - start_step + 1);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub agent: AgentId,
    pub task: TaskId,
    pub start: u32,
}

/// A transmission of a task's data product over one link, covering steps
/// `start..end`. `bits[s]` is what is credited during step `start + s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommEvent {
    pub src: AgentId,
    pub dst: AgentId,
    pub task: TaskId,
    pub start: u32,
    pub end: u32,
    pub bits: Vec<Q>,
}

impl CommEvent {
    pub fn total_bits(&self) -> Q {
        self.bits.iter().copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub placements: Vec<Placement>,
    pub comms: Vec<CommEvent>,
    pub objective_value: Q,
    pub makespan_steps: u32,
}

impl Schedule {
    pub fn empty() -> Self {
        Schedule::default()
    }

    /// Sorts placements by (start, agent, task) and comms by (start, src, dst, task).
    pub fn normalize(&mut self) {
        self.placements
            .sort_by(|a, b| (a.start, &a.agent, &a.task).cmp(&(b.start, &b.agent, &b.task)));
        self.comms.sort_by(|a, b| {
            (a.start, &a.src, &a.dst, &a.task).cmp(&(b.start, &b.src, &b.dst, &b.task))
        });
    }

    pub fn placement_of(&self, task: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.task == task)
    }

    pub fn is_placed(&self, task: &str) -> bool {
        self.placement_of(task).is_some()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "value {} makespan {}",
            format_q(&self.objective_value),
            self.makespan_steps
        )?;
        for p in &self.placements {
            writeln!(f, "  place {} {} @{}", p.agent, p.task, p.start)?;
        }
        for c in &self.comms {
            writeln!(
                f,
                "  comm {}->{} {} [{},{})",
                c.src, c.dst, c.task, c.start, c.end
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle(Vec<TaskId>),
    NoEligibleAgent(TaskId),
    NegativeCost {
        agent: AgentId,
        task: TaskId,
    },
    NonPositiveTime {
        agent: AgentId,
        task: TaskId,
    },
    NegativeRate {
        src: AgentId,
        dst: AgentId,
        step: u32,
    },
    NegativeReward(TaskId),
    NegativeSize(TaskId),
    InvalidObjectiveWeights,
    SelfishInfeasible(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle(c) => write!(f, "dependency cycle: {}", c.join(" -> ")),
            Violation::NoEligibleAgent(t) => {
                write!(f, "required task `{t}` is forbidden on every agent")
            }
            Violation::NegativeCost { agent, task } => {
                write!(f, "negative cost for `{task}` on `{agent}`")
            }
            Violation::NonPositiveTime { agent, task } => {
                write!(f, "compute time for `{task}` on `{agent}` must be positive")
            }
            Violation::NegativeRate { src, dst, step } => {
                write!(f, "negative rate on {src}->{dst} at step {step}")
            }
            Violation::NegativeReward(t) => write!(f, "negative reward on `{t}`"),
            Violation::NegativeSize(t) => write!(f, "negative product size on `{t}`"),
            Violation::InvalidObjectiveWeights => {
                write!(f, "objective weights must be non-negative, one positive")
            }
            Violation::SelfishInfeasible(why) => {
                write!(f, "selfish schedule does not fit the horizon: {why}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the admissibility assumptions. An empty report means the instance
/// can be encoded and has a feasible selfish schedule.
pub fn validate_problem(p: &ProblemInstance) -> ValidationReport {
    let mut violations = Vec::new();
    let cycle = p.network.find_cycle();
    if let Some(c) = &cycle {
        violations.push(Violation::Cycle(c.clone()));
    }
    for t in p.network.tasks() {
        if t.reward.is_negative() {
            violations.push(Violation::NegativeReward(t.id.clone()));
        }
        if t.product_size.is_negative() {
            violations.push(Violation::NegativeSize(t.id.clone()));
        }
        if t.required && !p.agents.iter().any(|a| a.allows(&t.id)) {
            violations.push(Violation::NoEligibleAgent(t.id.clone()));
        }
    }
    for a in &p.agents {
        for (tid, c) in &a.costs {
            if c.energy.is_negative() || c.time.is_negative() {
                violations.push(Violation::NegativeCost {
                    agent: a.id.clone(),
                    task: tid.clone(),
                });
            }
        }
    }
    let n = p.num_agents();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..p.steps() {
                if p.contacts.link_rate(i, j, k).is_negative() {
                    violations.push(Violation::NegativeRate {
                        src: p.agents[i].id.clone(),
                        dst: p.agents[j].id.clone(),
                        step: k,
                    });
                }
            }
        }
    }
    if !p.objective.weights_valid() {
        violations.push(Violation::InvalidObjectiveWeights);
    }
    if violations.is_empty() {
        if let Err(e) = crate::baseline::selfish_schedule(p, crate::baseline::SelfishMode::Strict) {
            violations.push(Violation::SelfishInfeasible(e.to_string()));
        }
    }
    ValidationReport { violations }
}
