//! Scenario files, the rover task network, the distance-based link model,
//! the random instance generator and hand-built behaviour scenarios.

mod canned;
mod format;
mod geometry;
mod puffer;
mod random;

pub use canned::{canned_scenario, canned_text, CANNED};
pub use format::{
    objective_text, parse_objective, parse_scenario, parse_schedule, write_schedule,
    ParsedSchedule, SCHEDULE_HEADER,
};
pub use geometry::{geometric_rates, segment_blocked, Point};
pub use puffer::{
    puffer_costs, puffer_network, PufferCosts, PufferSizes, REWARD_ANALYZE, REWARD_COLLECT,
    REWARD_STORE,
};
pub use random::generate_random;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::distsim::{CycleConfig, EventKind, WorldScript};
use crate::model::{
    AgentProfile, ContactGraph, Horizon, InterferenceSet, ModelError, Objective, ProblemInstance,
    SoftwareNetwork, Task, TaskCost, TaskKind,
};
use crate::rational::{q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    pub id: String,
    pub base_station: bool,
    /// Starts inside a science zone.
    pub science: bool,
    pub position: Option<Point>,
}

impl AgentSpec {
    pub fn new(id: impl Into<String>) -> Self {
        AgentSpec {
            id: id.into(),
            base_station: false,
            science: false,
            position: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RateSpec {
    Constant(Q),
    PerStep(Vec<Q>),
}

impl RateSpec {
    pub fn at(&self, k: u32) -> Q {
        match self {
            RateSpec::Constant(r) => *r,
            RateSpec::PerStep(v) => v.get(k as usize).copied().unwrap_or_else(Q::zero),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub src: String,
    pub dst: String,
    pub symmetric: bool,
    pub rate: RateSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub time: Q,
    pub agent: String,
    pub to: Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContactModel {
    /// Per-link rates indexed by planning step.
    Explicit(Vec<LinkSpec>),
    /// Rates from agent positions; positions change at `moves`.
    Geometric {
        obstacles: Vec<Vec<Point>>,
        moves: Vec<Move>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceSpec {
    pub links: Vec<(String, String)>,
    pub capacity: RateSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostEntry {
    pub agent: String,
    pub task: String,
    pub time: Q,
    pub energy: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioFile {
    pub name: String,
    pub horizon_seconds: Q,
    pub steps: u32,
    pub objective: Objective,
    pub agents: Vec<AgentSpec>,
    pub tasks: Vec<Task>,
    pub costs: Vec<CostEntry>,
    pub contacts: ContactModel,
    pub interference: Vec<InterferenceSpec>,
    pub comm_energy: Vec<(String, String, Q)>,
    pub config: CycleConfig,
    pub script: WorldScript,
}

/// A task to plan together with where its cost table comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanTask {
    pub task: Task,
    pub source: CostSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostSource {
    /// Use the scenario's cost rows for this template task id.
    Template(String),
    /// Free on exactly this agent, forbidden elsewhere.
    Pinned(String),
}

impl ScenarioFile {
    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn step_duration(&self) -> Q {
        self.horizon_seconds / q(self.steps as i128)
    }

    pub fn to_text(&self) -> String {
        format::write_scenario(self)
    }

    fn position_at(&self, agent: usize, t: Q) -> Option<Point> {
        let mut pos = self.agents[agent].position?;
        if let ContactModel::Geometric { moves, .. } = &self.contacts {
            for mv in moves {
                if mv.time <= t && mv.agent == self.agents[agent].id {
                    pos = mv.to;
                }
            }
        }
        Some(pos)
    }

    /// Rate of `i -> j` during planning step `k` of a window starting at
    /// mission time `start`, as seen with event knowledge up to `known_until`.
    pub fn rate(&self, i: usize, j: usize, k: u32, start: Q, known_until: Q) -> Q {
        if i == j {
            return Q::zero();
        }
        let t = start + self.step_duration() * q(k as i128);
        let (ai, aj) = (&self.agents[i].id, &self.agents[j].id);
        let mut rate = match &self.contacts {
            ContactModel::Explicit(links) => {
                let mut r = Q::zero();
                for l in links {
                    if (&l.src == ai && &l.dst == aj)
                        || (l.symmetric && &l.src == aj && &l.dst == ai)
                    {
                        r = l.rate.at(k);
                    }
                }
                r
            }
            ContactModel::Geometric { obstacles, .. } => {
                match (self.position_at(i, t), self.position_at(j, t)) {
                    (Some(a), Some(b)) => geometric_rates(a, b, obstacles),
                    _ => Q::zero(),
                }
            }
        };
        let same = |a: &String, b: &String| (a == ai && b == aj) || (a == aj && b == ai);
        let base = rate;
        for e in self.script.visible(t, known_until) {
            match &e.kind {
                EventKind::LinkRate { a, b, bps } if same(a, b) => rate = *bps,
                EventKind::LinkCut { a, b } if same(a, b) => rate = Q::zero(),
                EventKind::LinkRestore { a, b } if same(a, b) => rate = base,
                _ => {}
            }
        }
        rate
    }

    /// Builds the planning instance over `agents` (scenario indices, in
    /// order) for a window starting at mission time `start`.
    pub fn build_instance(
        &self,
        agents: &[usize],
        tasks: &[PlanTask],
        start: Q,
        known_until: Q,
    ) -> Result<ProblemInstance, ScenarioError> {
        let mut table: BTreeMap<(&str, &str), TaskCost> = BTreeMap::new();
        for c in &self.costs {
            table.insert(
                (c.agent.as_str(), c.task.as_str()),
                TaskCost::new(c.time, c.energy),
            );
        }
        let mut profiles = Vec::new();
        for &a in agents {
            let spec = &self.agents[a];
            let mut prof = AgentProfile::new(spec.id.clone());
            prof.base_station = spec.base_station;
            for pt in tasks {
                match &pt.source {
                    CostSource::Template(tid) => {
                        if let Some(c) = table.get(&(spec.id.as_str(), tid.as_str())) {
                            prof.costs.insert(pt.task.id.clone(), c.clone());
                        }
                    }
                    CostSource::Pinned(holder) => {
                        if holder == &spec.id {
                            prof.costs
                                .insert(pt.task.id.clone(), TaskCost::new(Q::zero(), Q::zero()));
                        }
                    }
                }
            }
            profiles.push(prof);
        }
        let network = SoftwareNetwork::new(tasks.iter().map(|t| t.task.clone()).collect())?;
        let n = agents.len();
        let mut cg = ContactGraph::new(n, self.steps);
        for (x, &i) in agents.iter().enumerate() {
            for (y, &j) in agents.iter().enumerate() {
                if x != y {
                    for k in 0..self.steps {
                        cg.set_rate(x, y, k, self.rate(i, j, k, start, known_until));
                    }
                }
            }
        }
        let local = |id: &str| agents.iter().position(|&a| self.agents[a].id == id);
        for (src, dst, e) in &self.comm_energy {
            if let (Some(x), Some(y)) = (local(src), local(dst)) {
                cg.set_comm_energy(x, y, *e);
            }
        }
        for set in &self.interference {
            let links: Vec<(usize, usize)> = set
                .links
                .iter()
                .filter_map(|(s, d)| Some((local(s)?, local(d)?)))
                .collect();
            if links.is_empty() {
                continue;
            }
            let capacity = (0..self.steps).map(|k| set.capacity.at(k)).collect();
            cg.interference.push(InterferenceSet { links, capacity });
        }
        let horizon = Horizon::new(self.horizon_seconds, self.steps)?;
        Ok(ProblemInstance::new(
            network,
            profiles,
            cg,
            horizon,
            self.objective.clone(),
        )?)
    }

    /// The scenario's tasks as plan tasks costed by their own ids.
    pub fn plan_tasks(&self) -> Vec<PlanTask> {
        self.tasks
            .iter()
            .map(|t| PlanTask {
                task: t.clone(),
                source: CostSource::Template(t.id.clone()),
            })
            .collect()
    }

    /// The instance described by the file: all agents, all tasks, the window
    /// starting at mission time 0 with forecast events known.
    pub fn to_problem(&self) -> Result<ProblemInstance, ScenarioError> {
        let all: Vec<usize> = (0..self.agents.len()).collect();
        self.build_instance(&all, &self.plan_tasks(), Q::zero(), Q::zero())
    }

    /// Optional tasks counted by class.
    pub fn kind_of(&self, task: &str) -> Option<TaskKind> {
        self.tasks.iter().find(|t| t.id == task).map(|t| t.kind)
    }
}
