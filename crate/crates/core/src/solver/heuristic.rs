//! Deterministic list-scheduling passes that supply starting incumbents.

use crate::baseline::{place, selfish_owner, to_schedule, Timeline};
use crate::model::{ProblemInstance, Schedule};
use crate::verify::occupancy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Policy {
    EarliestFinish,
    Owner,
    AwayFromOwner,
    LeastEnergy,
}

fn finish(p: &ProblemInstance, tl: &Timeline, t: usize) -> u32 {
    let (a, k) = tl.placed[t].expect("placed");
    k + occupancy(p.duration_steps(a, t).unwrap_or(0))
}

fn best_placement(
    p: &ProblemInstance,
    tl: &Timeline,
    t: usize,
    candidates: &[usize],
) -> Option<Timeline> {
    let mut best: Option<(u32, Timeline)> = None;
    for &a in candidates {
        let mut trial = tl.clone();
        if place(p, &mut trial, t, a, 2) {
            let f = finish(p, &trial, t);
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, trial));
            }
        }
    }
    best.map(|(_, tl)| tl)
}

fn run(p: &ProblemInstance, policy: Policy, optional: bool) -> Option<Schedule> {
    let n = p.num_agents();
    let m = p.num_tasks();
    let mut tl = Timeline::new(p);
    let mut owners: Vec<Option<usize>> = vec![None; m];
    let eligible = |t: usize| {
        (0..n)
            .filter(|&a| p.cost(a, t).is_some())
            .collect::<Vec<_>>()
    };
    for t in 0..m {
        if !p.task(t).required {
            continue;
        }
        let all = eligible(t);
        let owner = selfish_owner(p, t, &owners);
        let order: Vec<Vec<usize>> = match policy {
            Policy::EarliestFinish => vec![all],
            Policy::Owner => vec![owner.into_iter().collect(), all],
            Policy::AwayFromOwner => vec![
                all.iter().copied().filter(|a| Some(*a) != owner).collect(),
                all,
            ],
            Policy::LeastEnergy => {
                let min = all
                    .iter()
                    .filter_map(|&a| p.cost(a, t).map(|c| c.energy))
                    .min()?;
                vec![
                    all.iter()
                        .copied()
                        .filter(|&a| p.cost(a, t).is_some_and(|c| c.energy == min))
                        .collect(),
                    all,
                ]
            }
        };
        let next = order
            .iter()
            .find_map(|cands| best_placement(p, &tl, t, cands))?;
        tl = next;
        owners[t] = tl.placed[t].map(|(a, _)| a);
    }
    if optional {
        for t in 0..m {
            if p.task(t).required {
                continue;
            }
            if let Some(next) = best_placement(p, &tl, t, &eligible(t)) {
                tl = next;
                owners[t] = tl.placed[t].map(|(a, _)| a);
            }
        }
    }
    Some(to_schedule(p, &tl))
}

/// Candidate schedules in a fixed order. Callers keep the first best one.
pub(crate) fn candidates(p: &ProblemInstance) -> Vec<Schedule> {
    let mut out = Vec::new();
    for policy in [
        Policy::Owner,
        Policy::EarliestFinish,
        Policy::AwayFromOwner,
        Policy::LeastEnergy,
    ] {
        for optional in [true, false] {
            if let Some(s) = run(p, policy, optional) {
                out.push(s);
            }
        }
    }
    out
}
