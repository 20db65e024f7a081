//! Selfish reference schedules: every agent runs its own tasks, products move
//! between agents only when a dependency forces it.

use num_traits::Zero;
use thiserror::Error;

use crate::model::{CommEvent, Placement, ProblemInstance, Schedule, TaskKind};
use crate::rational::{format_q, Q};
use crate::verify::{finalize, occupancy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfishMode {
    /// Required tasks only, each on the agent that owns it.
    Strict,
    /// As `Strict`, then optional samples are collected and analysed locally
    /// and shipped to a base station for storage when time allows.
    StorageExcepted,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("required task `{0}` does not fit within the horizon")]
    HorizonOverflow(String),
    #[error("required task `{0}` has no agent that can run it")]
    NoAgent(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Timeline {
    pub busy: Vec<Vec<bool>>,
    /// First step at which agent holds the product of task.
    pub known: Vec<Vec<Option<u32>>>,
    pub placed: Vec<Option<(usize, u32)>>,
    pub sends: Vec<(usize, usize, usize, u32)>,
}

impl Timeline {
    pub fn new(p: &ProblemInstance) -> Self {
        let n = p.num_agents();
        let m = p.num_tasks();
        Timeline {
            busy: vec![vec![false; p.steps() as usize]; n],
            known: vec![vec![None; m]; n],
            placed: vec![None; m],
            sends: Vec::new(),
        }
    }

    fn free(&self, a: usize, from: u32, len: u32) -> bool {
        (from..from + len).all(|k| !self.busy[a][k as usize])
    }

    fn learn(&mut self, a: usize, t: usize, k: u32) {
        if self.known[a][t].is_none_or(|prev| k < prev) {
            self.known[a][t] = Some(k);
        }
    }
}

/// Direct transfer of task `t` from `src` to `dst`, starting no earlier than
/// `from`. Reserves the steps it uses and returns the arrival step.
fn send_direct(
    p: &ProblemInstance,
    tl: &mut Timeline,
    src: usize,
    dst: usize,
    t: usize,
    from: u32,
) -> Option<u32> {
    let size = p.task(t).product_size;
    let mut acc = Q::zero();
    let mut used = Vec::new();
    for k in from..p.steps() {
        let ku = k as usize;
        if tl.busy[src][ku] || tl.busy[dst][ku] {
            continue;
        }
        let bits = p.bits_per_step(src, dst, k);
        if bits.is_zero() {
            continue;
        }
        acc += bits;
        used.push(k);
        if acc >= size {
            for &s in &used {
                tl.busy[src][s as usize] = true;
                tl.busy[dst][s as usize] = true;
                tl.sends.push((src, dst, t, s));
            }
            tl.learn(dst, t, k + 1);
            return Some(k + 1);
        }
    }
    None
}

fn simple_paths(n: usize, src: usize, dst: usize, max_hops: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![src]];
    while let Some(path) = stack.pop() {
        let last = *path.last().expect("non-empty");
        if last == dst {
            out.push(path);
            continue;
        }
        if path.len() > max_hops {
            continue;
        }
        for next in (0..n).rev() {
            if !path.contains(&next) {
                let mut p2 = path.clone();
                p2.push(next);
                stack.push(p2);
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Makes the product of `t` available at `dst`. Tries a direct link first,
/// then store-and-forward paths of up to `max_hops` links.
fn route(
    p: &ProblemInstance,
    tl: &mut Timeline,
    t: usize,
    dst: usize,
    max_hops: usize,
) -> Option<u32> {
    if let Some(k) = tl.known[dst][t] {
        return Some(k);
    }
    let (holder, _) = tl.placed[t]?;
    let ready = tl.known[holder][t]?;
    let mut best: Option<(u32, Timeline)> = None;
    for path in simple_paths(p.num_agents(), holder, dst, max_hops) {
        let mut trial = tl.clone();
        let mut at = ready;
        let mut ok = true;
        for hop in path.windows(2) {
            let have = trial.known[hop[1]][t];
            match have {
                Some(k) => at = k,
                None => match send_direct(p, &mut trial, hop[0], hop[1], t, at) {
                    Some(k) => at = k,
                    None => {
                        ok = false;
                        break;
                    }
                },
            }
        }
        if ok {
            if path.len() == 2 {
                *tl = trial;
                return Some(at);
            }
            if best.as_ref().is_none_or(|(b, _)| at < *b) {
                best = Some((at, trial));
            }
        }
    }
    let (at, trial) = best?;
    *tl = trial;
    Some(at)
}

/// Places task `t` on agent `a` at the earliest feasible step. On failure the
/// timeline is left unchanged.
pub(crate) fn place(
    p: &ProblemInstance,
    tl: &mut Timeline,
    t: usize,
    a: usize,
    max_hops: usize,
) -> bool {
    let Some(c) = p.duration_steps(a, t) else {
        return false;
    };
    let mut trial = tl.clone();
    let mut earliest = 0;
    for pred in p.network.pred_indices(t) {
        if trial.placed[pred].is_none() {
            return false;
        }
        match route(p, &mut trial, pred, a, max_hops) {
            Some(k) => earliest = earliest.max(k),
            None => return false,
        }
    }
    let occ = occupancy(c);
    let h = p.steps();
    let mut k = earliest;
    while k + occ <= h {
        if trial.free(a, k, occ) {
            for s in k..k + occ {
                trial.busy[a][s as usize] = true;
            }
            trial.placed[t] = Some((a, k));
            trial.learn(a, t, k + occ);
            if p.task(t).product_size.is_zero() {
                for i in 0..p.num_agents() {
                    trial.learn(i, t, k + occ);
                }
            }
            *tl = trial;
            return true;
        }
        k += 1;
    }
    false
}

/// The agent that runs task `t` selfishly: its declared owner, else the agent
/// already running one of its predecessors, else the fastest eligible agent.
pub fn selfish_owner(p: &ProblemInstance, t: usize, placed: &[Option<usize>]) -> Option<usize> {
    let task = p.task(t);
    if let Some(owner) = &task.owner {
        return p.agent_index(owner).filter(|&a| p.cost(a, t).is_some());
    }
    for pred in p.network.pred_indices(t) {
        if let Some(a) = placed[pred] {
            if p.cost(a, t).is_some() {
                return Some(a);
            }
        }
    }
    (0..p.num_agents())
        .filter_map(|a| p.cost(a, t).map(|c| (c.time, a)))
        .min_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)))
        .map(|(_, a)| a)
}

fn storage_agent(p: &ProblemInstance, t: usize) -> Option<usize> {
    (0..p.num_agents()).find(|&a| p.agents[a].base_station && p.cost(a, t).is_some())
}

pub(crate) fn to_schedule(p: &ProblemInstance, tl: &Timeline) -> Schedule {
    let mut s = Schedule::empty();
    for (t, slot) in tl.placed.iter().enumerate() {
        if let Some((a, k)) = slot {
            s.placements.push(Placement {
                agent: p.agents[*a].id.clone(),
                task: p.task(t).id.clone(),
                start: *k,
            });
        }
    }
    let mut sends = tl.sends.clone();
    sends.sort();
    let mut i = 0;
    while i < sends.len() {
        let (src, dst, t, start) = sends[i];
        let mut end = start + 1;
        let mut bits = vec![p.bits_per_step(src, dst, start)];
        let mut j = i + 1;
        while j < sends.len() && sends[j] == (src, dst, t, end) {
            bits.push(p.bits_per_step(src, dst, end));
            end += 1;
            j += 1;
        }
        s.comms.push(CommEvent {
            src: p.agents[src].id.clone(),
            dst: p.agents[dst].id.clone(),
            task: p.task(t).id.clone(),
            start,
            end,
            bits,
        });
        i = j;
    }
    finalize(p, &mut s);
    s
}

/// Builds the selfish schedule for `p`.
pub fn selfish_schedule(p: &ProblemInstance, mode: SelfishMode) -> Result<Schedule, BaselineError> {
    let m = p.num_tasks();
    let mut tl = Timeline::new(p);
    let mut owners: Vec<Option<usize>> = vec![None; m];
    for t in 0..m {
        let task = p.task(t);
        if !task.required {
            continue;
        }
        let a =
            selfish_owner(p, t, &owners).ok_or_else(|| BaselineError::NoAgent(task.id.clone()))?;
        if !place(p, &mut tl, t, a, 1) {
            return Err(BaselineError::HorizonOverflow(task.id.clone()));
        }
        owners[t] = Some(a);
    }
    if mode == SelfishMode::StorageExcepted {
        for t in 0..m {
            let task = p.task(t);
            if task.required {
                continue;
            }
            let target = if task.kind == TaskKind::Store {
                storage_agent(p, t).or_else(|| selfish_owner(p, t, &owners))
            } else {
                selfish_owner(p, t, &owners)
            };
            let Some(a) = target else { continue };
            if place(p, &mut tl, t, a, 3) {
                owners[t] = Some(a);
            }
        }
    }
    Ok(to_schedule(p, &tl))
}

/// Science and cost figures of one schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleMetrics {
    pub value: Q,
    pub collected: usize,
    pub analyzed: usize,
    pub stored: usize,
    pub optional: usize,
    pub tasks: usize,
    /// Computation plus communication energy.
    pub energy: Q,
    pub makespan: u32,
    pub bits: Q,
}

impl ScheduleMetrics {
    pub fn of(p: &ProblemInstance, s: &Schedule) -> Self {
        let kind_count = |k: TaskKind| {
            s.placements
                .iter()
                .filter(|pl| p.network.get(&pl.task).is_some_and(|t| t.kind == k))
                .count()
        };
        ScheduleMetrics {
            value: crate::verify::evaluate(p, s),
            collected: kind_count(TaskKind::Collect),
            analyzed: kind_count(TaskKind::Analyze),
            stored: kind_count(TaskKind::Store),
            optional: s
                .placements
                .iter()
                .filter(|pl| p.network.get(&pl.task).is_some_and(|t| !t.required))
                .count(),
            tasks: s.placements.len(),
            energy: crate::verify::total_energy(p, s),
            makespan: crate::verify::makespan(p, s),
            bits: s.comms.iter().map(|c| c.total_bits()).sum(),
        }
    }

    /// Energy per executed task, `None` for an empty schedule.
    pub fn average_energy(&self) -> Option<Q> {
        (self.tasks > 0).then(|| self.energy / Q::from_integer(self.tasks as i128))
    }
}

/// Side-by-side figures for a shared schedule against a selfish one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonMetrics {
    pub shared: ScheduleMetrics,
    pub selfish: ScheduleMetrics,
}

impl ComparisonMetrics {
    /// `shared / selfish` objective values for positive selfish values.
    pub fn ratio(&self) -> Option<Q> {
        (self.selfish.value > Q::zero()).then(|| self.shared.value / self.selfish.value)
    }

    /// Ratio of samples collected.
    pub fn collected_ratio(&self) -> Option<Q> {
        (self.selfish.collected > 0).then(|| {
            Q::new(
                self.shared.collected as i128,
                self.selfish.collected as i128,
            )
        })
    }

    pub fn value_delta(&self) -> Q {
        self.shared.value - self.selfish.value
    }
}

impl std::fmt::Display for ComparisonMetrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, m) in [("shared", &self.shared), ("selfish", &self.selfish)] {
            let avg = m
                .average_energy()
                .map(|a| format_q(&a))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{name:8} value {} collected {} analyzed {} stored {} energy {} avg {} makespan {} bits {}",
                format_q(&m.value),
                m.collected,
                m.analyzed,
                m.stored,
                format_q(&m.energy),
                avg,
                m.makespan,
                format_q(&m.bits)
            )?;
        }
        Ok(())
    }
}

pub fn compare(p: &ProblemInstance, shared: &Schedule, selfish: &Schedule) -> ComparisonMetrics {
    ComparisonMetrics {
        shared: ScheduleMetrics::of(p, shared),
        selfish: ScheduleMetrics::of(p, selfish),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::rational::q;
    use crate::verify::check_schedule;

    fn pair() -> ProblemInstance {
        let net = SoftwareNetwork::new(vec![
            Task::required("a").owned_by("r1").size(q(4)),
            Task::required("b").after(&["a"]).owned_by("r2"),
            Task::optional("c", q(5)).owned_by("r1"),
        ])
        .unwrap();
        let agents = vec![
            AgentProfile::new("r1")
                .with_cost("a", q(2), q(1))
                .with_cost("c", q(1), q(1)),
            AgentProfile::new("r2").with_cost("b", q(1), q(1)),
        ];
        let mut cg = ContactGraph::new(2, 10);
        cg.set_symmetric(0, 1, q(2));
        ProblemInstance::new(
            net,
            agents,
            cg,
            Horizon::unit_steps(10),
            Objective::OptionalReward,
        )
        .unwrap()
    }

    #[test]
    fn strict_routes_dependency_and_skips_optional() {
        let p = pair();
        let s = selfish_schedule(&p, SelfishMode::Strict).unwrap();
        check_schedule(&p, &s, false).unwrap();
        assert_eq!(s.placement_of("a").unwrap().start, 0);
        // two steps of transfer at 2 bits, so b can start at 4
        assert_eq!(s.placement_of("b").unwrap().start, 4);
        assert!(!s.is_placed("c"));
        assert_eq!(s.comms.len(), 1);
    }

    #[test]
    fn storage_excepted_adds_optional_work() {
        let p = pair();
        let s = selfish_schedule(&p, SelfishMode::StorageExcepted).unwrap();
        check_schedule(&p, &s, false).unwrap();
        assert!(s.is_placed("c"));
        assert_eq!(s.objective_value, q(5));
    }

    #[test]
    fn overflow_is_reported() {
        let mut p = pair();
        p.agents[0] = AgentProfile::new("r1")
            .with_cost("a", q(11), q(1))
            .with_cost("c", q(1), q(1));
        assert_eq!(
            selfish_schedule(&p, SelfishMode::Strict),
            Err(BaselineError::HorizonOverflow("a".into()))
        );
    }

    #[test]
    fn relay_path_is_used_when_no_direct_link() {
        let net = SoftwareNetwork::new(vec![
            Task::optional("a", q(1)).owned_by("r").size(q(1)),
            Task::optional("s", q(1))
                .after(&["a"])
                .kind(TaskKind::Store),
        ])
        .unwrap();
        let agents = vec![
            AgentProfile::new("r").with_cost("a", q(1), q(0)),
            AgentProfile::new("m"),
            AgentProfile::new("b")
                .base_station()
                .with_cost("s", q(1), q(0)),
        ];
        let mut cg = ContactGraph::new(3, 8);
        cg.set_symmetric(0, 1, q(1));
        cg.set_symmetric(1, 2, q(1));
        let p = ProblemInstance::new(
            net,
            agents,
            cg,
            Horizon::unit_steps(8),
            Objective::OptionalReward,
        )
        .unwrap();
        let s = selfish_schedule(&p, SelfishMode::StorageExcepted).unwrap();
        check_schedule(&p, &s, false).unwrap();
        assert_eq!(s.placement_of("s").unwrap().start, 3);
        assert_eq!(s.comms.len(), 2);
    }

    #[test]
    fn identical_schedules_have_zero_deltas() {
        let p = pair();
        let s = selfish_schedule(&p, SelfishMode::StorageExcepted).unwrap();
        let m = compare(&p, &s, &s);
        assert_eq!(m.shared, m.selfish);
        assert_eq!(m.value_delta(), q(0));
        assert_eq!(m.ratio(), Some(q(1)));
        assert_eq!(m.shared.bits, q(4));
        assert_eq!(m.shared.average_energy(), Some(q(1)));
    }
}
