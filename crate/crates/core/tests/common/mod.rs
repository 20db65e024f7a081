#![allow(dead_code)]

use commsched::model::*;
use commsched::rational::{q, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn objective_for(kind: usize) -> Objective {
    match kind % 3 {
        0 => Objective::OptionalReward,
        1 => Objective::Makespan,
        _ => Objective::Energy,
    }
}

/// Random instance inside the brute-force guard.
pub fn random_small(seed: u64, objective: Objective) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3usize);
    let m = rng.gen_range(1..=5usize);
    let h = rng.gen_range(2..=8u32);
    let mut tasks = Vec::new();
    for t in 0..m {
        let id = format!("t{t}");
        let mut task = if rng.gen_bool(0.5) {
            Task::required(&id)
        } else {
            Task::optional(&id, q(rng.gen_range(1..=9)))
        };
        task = task.size(q(rng.gen_range(0..=4)));
        let preds: Vec<String> = (0..t)
            .filter(|_| rng.gen_bool(0.35))
            .map(|p| format!("t{p}"))
            .collect();
        task = task.after(&preds);
        tasks.push(task);
    }
    let net = SoftwareNetwork::new(tasks).unwrap();
    let mut agents = Vec::new();
    for a in 0..n {
        let mut prof = AgentProfile::new(format!("a{a}"));
        for t in 0..m {
            if rng.gen_bool(0.8) {
                prof = prof.with_cost(
                    format!("t{t}"),
                    q(rng.gen_range(0..=3)),
                    q(rng.gen_range(0..=5)),
                );
            }
        }
        agents.push(prof);
    }
    let mut cg = ContactGraph::new(n, h);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..h {
                if rng.gen_bool(0.6) {
                    cg.set_rate(i, j, k, q(rng.gen_range(1..=3)));
                }
            }
            if rng.gen_bool(0.3) {
                cg.set_comm_energy(i, j, Q::new(1, rng.gen_range(1..=4)));
            }
        }
    }
    ProblemInstance::new(net, agents, cg, Horizon::unit_steps(h), objective).unwrap()
}

/// Same as [`random_small`] with one shared channel over a random subset of
/// links whose capacity is drawn below the summed link rates.
pub fn random_small_interference(seed: u64, objective: Objective) -> ProblemInstance {
    let base = random_small(seed, objective.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = base.num_agents();
    let h = base.steps();
    let links: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j && rng.gen_bool(0.7))
        .collect();
    let mut cg = base.contacts.clone();
    if !links.is_empty() {
        let capacity = (0..h).map(|_| q(rng.gen_range(1..=3))).collect();
        cg.interference.push(InterferenceSet { links, capacity });
    }
    ProblemInstance::new(
        base.network.clone(),
        base.agents.clone(),
        cg,
        base.horizon.clone(),
        objective,
    )
    .unwrap()
}
