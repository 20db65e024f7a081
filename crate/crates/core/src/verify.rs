//! Schedule-level semantics, checked directly on placements and transfers
//! without going through the integer program. Used as the independent
//! checker for decoded and baseline schedules.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::model::{BaseObjective, ProblemInstance, Schedule};
use crate::rational::{format_q, q, Q};

/// Steps an agent is busy with a task of `duration` steps.
pub fn occupancy(duration: u32) -> u32 {
    duration.max(1)
}

/// Value of one base objective component for a schedule.
pub fn component_value(p: &ProblemInstance, s: &Schedule, which: BaseObjective) -> Q {
    match which {
        BaseObjective::OptionalReward => s
            .placements
            .iter()
            .filter_map(|pl| p.network.get(&pl.task))
            .map(|t| t.effective_reward())
            .sum(),
        BaseObjective::Energy => -total_energy(p, s),
        BaseObjective::Makespan => -q(makespan(p, s) as i128),
    }
}

/// Computation energy plus communication energy. Communication energy is
/// charged per active transfer step at the link's nominal bits per step.
pub fn total_energy(p: &ProblemInstance, s: &Schedule) -> Q {
    let mut e = Q::zero();
    for pl in &s.placements {
        if let (Some(a), Some(t)) = (p.agent_index(&pl.agent), p.network.index_of(&pl.task)) {
            if let Some(c) = p.cost(a, t) {
                e += c.energy;
            }
        }
    }
    e + comm_energy(p, s)
}

pub fn comm_energy(p: &ProblemInstance, s: &Schedule) -> Q {
    let mut e = Q::zero();
    for c in &s.comms {
        if let (Some(i), Some(j)) = (p.agent_index(&c.src), p.agent_index(&c.dst)) {
            let per_bit = p.contacts.comm_energy(i, j);
            if per_bit.is_zero() {
                continue;
            }
            for k in c.start..c.end {
                e += per_bit * p.bits_per_step(i, j, k);
            }
        }
    }
    e
}

/// Latest completion step over all placements (0 for an empty schedule).
pub fn makespan(p: &ProblemInstance, s: &Schedule) -> u32 {
    s.placements
        .iter()
        .filter_map(|pl| {
            let a = p.agent_index(&pl.agent)?;
            let t = p.network.index_of(&pl.task)?;
            Some(pl.start + p.duration_steps(a, t)?)
        })
        .max()
        .unwrap_or(0)
}

/// Objective value of a schedule under the instance's objective.
pub fn evaluate(p: &ProblemInstance, s: &Schedule) -> Q {
    p.objective
        .components()
        .iter()
        .map(|(c, w)| *w * component_value(p, s, *c))
        .sum()
}

/// Fills in `objective_value` and `makespan_steps` from the placements.
pub fn finalize(p: &ProblemInstance, s: &mut Schedule) {
    s.normalize();
    s.objective_value = evaluate(p, s);
    s.makespan_steps = makespan(p, s);
}

/// Drops transfers whose receiver never uses the product afterwards, either
/// by running a successor or by forwarding it. Returns true if any went.
pub fn prune_unused_comms(p: &ProblemInstance, s: &mut Schedule) -> bool {
    let before = s.comms.len();
    loop {
        let keep: Vec<bool> = s
            .comms
            .iter()
            .map(|c| {
                let Some(t) = p.network.index_of(&c.task) else {
                    return true;
                };
                let runs = p.network.successors(t).iter().any(|&u| {
                    s.placements
                        .iter()
                        .any(|pl| pl.agent == c.dst && pl.task == p.task(u).id && pl.start >= c.end)
                });
                let forwards = s
                    .comms
                    .iter()
                    .any(|o| o.src == c.dst && o.task == c.task && o.start >= c.end);
                runs || forwards
            })
            .collect();
        if keep.iter().all(|&k| k) {
            break;
        }
        let mut it = keep.iter();
        s.comms.retain(|_| *it.next().unwrap());
    }
    if s.comms.len() == before {
        return false;
    }
    finalize(p, s);
    true
}

/// Checks every schedule invariant: placement legality, single activity per
/// agent per step, data availability for every start and every transfer,
/// per-step bit budgets (or interference capacities) and the reported
/// objective value. Returns all violations found.
pub fn check_schedule(
    p: &ProblemInstance,
    s: &Schedule,
    interference: bool,
) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    let n = p.num_agents();
    let m = p.num_tasks();
    let h = p.steps();
    let dt = p.horizon.step_duration();

    let mut placed: Vec<Option<(usize, u32)>> = vec![None; m];
    let mut busy = vec![vec![0u32; h as usize]; n];

    for pl in &s.placements {
        let (Some(a), Some(t)) = (p.agent_index(&pl.agent), p.network.index_of(&pl.task)) else {
            errs.push(format!(
                "placement references unknown agent/task {}/{}",
                pl.agent, pl.task
            ));
            continue;
        };
        let Some(c) = p.duration_steps(a, t) else {
            errs.push(format!("task {} is forbidden on {}", pl.task, pl.agent));
            continue;
        };
        if pl.start >= h || pl.start + c > h {
            errs.push(format!(
                "task {} on {} at {} does not finish within the horizon",
                pl.task, pl.agent, pl.start
            ));
            continue;
        }
        if placed[t].is_some() {
            errs.push(format!("task {} scheduled more than once", pl.task));
        }
        placed[t] = Some((a, pl.start));
        for k in pl.start..(pl.start + occupancy(c)).min(h) {
            busy[a][k as usize] += 1;
        }
    }
    for (t, task) in p.network.tasks().iter().enumerate() {
        if task.required && placed[t].is_none() {
            errs.push(format!("required task {} not scheduled", task.id));
        }
    }

    // per-step credited bits, indexed [step] -> list of (src, dst, task, bits)
    let mut steps: Vec<Vec<(usize, usize, usize, Q)>> = vec![Vec::new(); h as usize];
    for c in &s.comms {
        let (Some(i), Some(j), Some(t)) = (
            p.agent_index(&c.src),
            p.agent_index(&c.dst),
            p.network.index_of(&c.task),
        ) else {
            errs.push(format!(
                "comm references unknown ids {}->{} {}",
                c.src, c.dst, c.task
            ));
            continue;
        };
        if i == j {
            errs.push(format!("self-loop transfer of {} on {}", c.task, c.src));
            continue;
        }
        if c.end <= c.start || c.end > h || c.bits.len() != (c.end - c.start) as usize {
            errs.push(format!(
                "malformed comm event {}->{} {} [{},{})",
                c.src, c.dst, c.task, c.start, c.end
            ));
            continue;
        }
        for (off, bits) in c.bits.iter().enumerate() {
            let k = c.start + off as u32;
            let cap = p.bits_per_step(i, j, k);
            if interference {
                if bits.is_negative() || *bits > cap {
                    errs.push(format!(
                        "transfer {}->{} {} at {} exceeds link budget",
                        c.src, c.dst, c.task, k
                    ));
                }
            } else if *bits != cap {
                errs.push(format!(
                    "transfer {}->{} {} at {} credits {} bits, link gives {}",
                    c.src,
                    c.dst,
                    c.task,
                    k,
                    format_q(bits),
                    format_q(&cap)
                ));
            }
            busy[i][k as usize] += 1;
            busy[j][k as usize] += 1;
            steps[k as usize].push((i, j, t, *bits));
        }
    }
    for (a, row) in busy.iter().enumerate() {
        for (k, &b) in row.iter().enumerate() {
            if b > 1 {
                errs.push(format!(
                    "agent {} has {} activities at step {}",
                    p.agents[a].id, b, k
                ));
            }
        }
    }
    if interference {
        for (si, set) in p.contacts.interference.iter().enumerate() {
            for k in 0..h as usize {
                let used: Q = steps[k]
                    .iter()
                    .filter(|(i, j, _, _)| set.links.contains(&(*i, *j)))
                    .map(|(_, _, _, b)| *b)
                    .sum();
                if used > set.capacity[k] * dt {
                    errs.push(format!("interference set {si} over capacity at step {k}"));
                }
            }
        }
    }

    // knowledge[i][t] = first step at which agent i holds d(t)
    let mut known: Vec<Vec<Option<u32>>> = vec![vec![None; m]; n];
    let mut received: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    let learn = |known: &mut Vec<Vec<Option<u32>>>, i: usize, t: usize, k: u32| {
        if known[i][t].is_none_or(|prev| k < prev) {
            known[i][t] = Some(k);
        }
    };
    for (t, slot) in placed.iter().enumerate() {
        if let Some((a, start)) = *slot {
            let ready = start + occupancy(p.duration_steps(a, t).unwrap_or(0));
            learn(&mut known, a, t, ready);
            if p.task(t).product_size.is_zero() {
                for i in 0..n {
                    learn(&mut known, i, t, ready);
                }
            }
        }
    }
    for k in 0..h {
        for &(i, j, t, bits) in &steps[k as usize] {
            if known[i][t].is_none_or(|s| s > k) {
                errs.push(format!(
                    "{} sends {} at step {} before holding it",
                    p.agents[i].id,
                    p.task(t).id,
                    k
                ));
            }
            let acc = received.entry((j, t)).or_insert_with(Q::zero);
            *acc += bits;
            if *acc >= p.task(t).product_size {
                learn(&mut known, j, t, k + 1);
            }
        }
    }
    for (t, slot) in placed.iter().enumerate() {
        if let Some((a, start)) = *slot {
            for pred in p.network.pred_indices(t) {
                if known[a][pred].is_none_or(|s| s > start) {
                    errs.push(format!(
                        "{} starts {} at {} without {}",
                        p.agents[a].id,
                        p.task(t).id,
                        start,
                        p.task(pred).id
                    ));
                }
            }
        }
    }

    let value = evaluate(p, s);
    if value != s.objective_value {
        errs.push(format!(
            "objective value {} but schedule evaluates to {}",
            format_q(&s.objective_value),
            format_q(&value)
        ));
    }
    let ms = makespan(p, s);
    if ms != s.makespan_steps {
        errs.push(format!(
            "makespan {} but schedule ends at {}",
            s.makespan_steps, ms
        ));
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::rational::q;

    fn pair() -> ProblemInstance {
        let net = SoftwareNetwork::new(vec![
            Task::required("a").size(q(2)).owned_by("x"),
            Task::optional("b", q(5)).after(&["a"]).owned_by("y"),
        ])
        .unwrap();
        let agents = vec![
            AgentProfile::new("x").with_cost("a", q(1), q(2)),
            AgentProfile::new("y").with_cost("b", q(2), q(3)),
        ];
        let mut cg = ContactGraph::new(2, 6);
        cg.set_constant(0, 1, q(1));
        cg.set_comm_energy(0, 1, q(1));
        ProblemInstance::new(
            net,
            agents,
            cg,
            Horizon::unit_steps(6),
            Objective::OptionalReward,
        )
        .unwrap()
    }

    fn good() -> Schedule {
        let mut s = Schedule {
            placements: vec![
                Placement {
                    agent: "x".into(),
                    task: "a".into(),
                    start: 0,
                },
                Placement {
                    agent: "y".into(),
                    task: "b".into(),
                    start: 3,
                },
            ],
            comms: vec![CommEvent {
                src: "x".into(),
                dst: "y".into(),
                task: "a".into(),
                start: 1,
                end: 3,
                bits: vec![q(1), q(1)],
            }],
            ..Schedule::default()
        };
        finalize(&pair(), &mut s);
        s
    }

    #[test]
    fn metrics_of_a_valid_schedule() {
        let p = pair();
        let s = good();
        check_schedule(&p, &s, false).unwrap();
        assert_eq!(s.objective_value, q(5));
        assert_eq!(makespan(&p, &s), 5);
        assert_eq!(comm_energy(&p, &s), q(2));
        assert_eq!(total_energy(&p, &s), q(7));
        assert_eq!(component_value(&p, &s, BaseObjective::Makespan), q(-5));
        assert_eq!(occupancy(0), 1);
        assert_eq!(occupancy(3), 3);
    }

    #[test]
    fn violations_are_found() {
        let p = pair();
        let mut early = good();
        early.placements[1].start = 2;
        assert!(check_schedule(&p, &early, false).is_err());
        let mut greedy = good();
        greedy.comms[0].bits = vec![q(2), q(0)];
        assert!(check_schedule(&p, &greedy, false).is_err());
        let mut wrong = good();
        wrong.objective_value = q(6);
        assert!(check_schedule(&p, &wrong, false).is_err());
    }

    #[test]
    fn unused_transfers_are_pruned() {
        let p = pair();
        let mut s = good();
        s.placements.pop();
        assert!(prune_unused_comms(&p, &mut s));
        assert!(s.comms.is_empty());
        let mut kept = good();
        assert!(!prune_unused_comms(&p, &mut kept));
    }
}
