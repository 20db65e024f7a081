mod common;

use commsched::baseline::{selfish_schedule, SelfishMode};
use commsched::distsim::{flood, flooding_time_bound, is_hold, run_cycles, state_bits, AgentState};
use commsched::encoder::{assignment_from_schedule, decode, encode};
use commsched::model::*;
use commsched::rational::{q, qf, Q};
use commsched::scenarios::{generate_random, parse_scenario};
use commsched::solver::{solve, SolveBudget, SolveStatus};
use commsched::verify::{check_schedule, evaluate};
use proptest::prelude::*;

const BIG: u64 = 50_000_000;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn scaled(p: &ProblemInstance, k: Q) -> ProblemInstance {
    let tasks = p
        .network
        .tasks()
        .iter()
        .cloned()
        .map(|mut t| {
            t.reward *= k;
            t
        })
        .collect();
    ProblemInstance::new(
        SoftwareNetwork::new(tasks).unwrap(),
        p.agents.clone(),
        p.contacts.clone(),
        p.horizon.clone(),
        p.objective.clone(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn topological_order_is_a_stable_permutation(seed in 0u64..10_000) {
        let p = common::random_small(seed, Objective::OptionalReward);
        let order = topological_order(&p.network).unwrap();
        prop_assert_eq!(&order, &topological_order(&p.network).unwrap());
        let mut ids: Vec<String> = p.network.tasks().iter().map(|t| t.id.clone()).collect();
        let mut sorted = order.clone();
        ids.sort();
        sorted.sort();
        prop_assert_eq!(ids, sorted);
        for (pos, id) in order.iter().enumerate() {
            for pred in &p.network.get(id).unwrap().predecessors {
                prop_assert!(order[..pos].contains(pred));
            }
        }
    }

    #[test]
    fn validation_tracks_selfish_fit(seed in 0u64..10_000) {
        let p = common::random_small(seed, Objective::Makespan);
        let fits = selfish_schedule(&p, SelfishMode::Strict).is_ok();
        prop_assert_eq!(validate_problem(&p).is_admissible(), fits);
    }

    #[test]
    fn selfish_schedules_are_feasible_seeds(seed in 0u64..10_000, kind in 0usize..3) {
        let p = common::random_small(seed, common::objective_for(kind));
        for mode in [SelfishMode::Strict, SelfishMode::StorageExcepted] {
            let Ok(s) = selfish_schedule(&p, mode) else { continue };
            prop_assert!(check_schedule(&p, &s, false).is_ok());
            let inst = encode(&p, false).unwrap();
            prop_assert!(solve(&inst, Some(&s), &SolveBudget::nodes(10)).is_ok());
        }
    }

    #[test]
    fn decode_round_trips_feasible_assignments(seed in 0u64..10_000) {
        let p = common::random_small(seed, Objective::OptionalReward);
        let Ok(s) = selfish_schedule(&p, SelfishMode::StorageExcepted) else { return Ok(()) };
        let inst = encode(&p, false).unwrap();
        let values = assignment_from_schedule(&inst, &s).unwrap();
        prop_assert!(inst.check(&values).is_ok());
        let back = decode(&p, &inst, &values).unwrap();
        prop_assert!(check_schedule(&p, &back, false).is_ok());
        prop_assert_eq!(evaluate(&p, &back), evaluate(&p, &s));
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn solve_is_deterministic(seed in 0u64..10_000, kind in 0usize..3, budget in 1u64..400) {
        let p = common::random_small(seed, common::objective_for(kind));
        let Ok(inst) = encode(&p, false) else { return Ok(()) };
        let b = SolveBudget::nodes(budget);
        prop_assert_eq!(solve(&inst, None, &b).unwrap().to_text(), solve(&inst, None, &b).unwrap().to_text());
    }

    #[test]
    fn incumbent_improves_with_budget(seed in 0u64..10_000, kind in 0usize..3) {
        let p = common::random_small(seed, common::objective_for(kind));
        let Ok(inst) = encode(&p, false) else { return Ok(()) };
        let mut last: Option<Q> = None;
        for budget in [1, 4, 16, 64, 256, 4096] {
            let v = solve(&inst, None, &SolveBudget::nodes(budget)).unwrap().incumbent_value;
            if let Some(prev) = last {
                prop_assert!(v.is_some() && v.unwrap() >= prev);
            }
            last = v.or(last);
        }
    }

    #[test]
    fn reward_scaling_keeps_the_optimum(seed in 0u64..10_000, num in 1i128..7, den in 1i128..4) {
        let p = common::random_small(seed, Objective::OptionalReward);
        let Ok(inst) = encode(&p, false) else { return Ok(()) };
        let k = qf(num, den);
        let ps = scaled(&p, k);
        let a = solve(&inst, None, &SolveBudget::nodes(BIG)).unwrap();
        let b = solve(&encode(&ps, false).unwrap(), None, &SolveBudget::nodes(BIG)).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert!(a.status != SolveStatus::BudgetExhausted);
        prop_assert_eq!(b.incumbent_value, a.incumbent_value.map(|v| v * k));
        if let Some(s) = &b.incumbent {
            prop_assert_eq!(Some(evaluate(&p, s)), a.incumbent_value);
        }
    }

    #[test]
    fn shared_dominates_selfish(seed in 0u64..10_000) {
        let p = common::random_small(seed, Objective::OptionalReward);
        let Ok(selfish) = selfish_schedule(&p, SelfishMode::StorageExcepted) else { return Ok(()) };
        let r = solve(&encode(&p, false).unwrap(), None, &SolveBudget::nodes(BIG)).unwrap();
        prop_assert!(r.incumbent_value.unwrap() >= evaluate(&p, &selfish));
    }

    #[test]
    fn full_channel_never_overloaded(seed in 0u64..10_000) {
        let base = common::random_small(seed, Objective::OptionalReward);
        let n = base.num_agents();
        let h = base.steps();
        let links: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
        let max_rate = links
            .iter()
            .flat_map(|&(i, j)| (0..h).map(move |k| (i, j, k)))
            .map(|(i, j, k)| base.contacts.link_rate(i, j, k))
            .max()
            .unwrap_or_default();
        let mut cg = base.contacts.clone();
        cg.interference.push(InterferenceSet { links: links.clone(), capacity: vec![max_rate; h as usize] });
        let p = ProblemInstance::new(base.network.clone(), base.agents.clone(), cg, base.horizon.clone(), base.objective.clone()).unwrap();
        let Ok(inst) = encode(&p, true) else { return Ok(()) };
        let r = solve(&inst, None, &SolveBudget::nodes(5_000)).unwrap();
        let Some(s) = r.incumbent else { return Ok(()) };
        for k in 0..h {
            let load: Q = s
                .comms
                .iter()
                .filter(|c| c.start <= k && k < c.end)
                .map(|c| c.bits[(k - c.start) as usize])
                .sum();
            prop_assert!(load <= max_rate * p.horizon.step_duration());
        }
    }

    #[test]
    fn flooding_stays_within_bound(n in 2usize..16, extra in proptest::collection::vec((0usize..16, 0usize..16), 0..30), rate in 1i128..100_000) {
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            adj[i][(i + 1) % n] = true;
        }
        for (i, j) in extra {
            if i < n && j < n && i != j {
                adj[i][j] = true;
            }
        }
        let states: Vec<Option<AgentState>> =
            (0..n).map(|i| Some(AgentState { agent: i.to_string(), bandwidth_levels: vec![0; n], ..Default::default() })).collect();
        let out = flood(&states, |_, i, j| adj[i][j], n as u32);
        prop_assert!(out.complete());
        prop_assert!(out.elapsed(state_bits(n), q(rate)) <= flooding_time_bound(n, q(rate)));
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn generated_scenarios_are_pure_and_valid(n in 2usize..8, frac in 0i128..=4, seed in 0u64..1_000) {
        let a = generate_random(n, qf(frac, 4), 3, seed);
        prop_assert_eq!(a.to_text(), generate_random(n, qf(frac, 4), 3, seed).to_text());
        prop_assert_eq!(&parse_scenario(&a.to_text()).unwrap(), &a);
        prop_assert!(validate_problem(&a.to_problem().unwrap()).is_admissible());
    }

    #[test]
    fn required_work_is_never_lost(off in 0i128..6, on in 1i128..30, cycles in 2u32..4) {
        let text = format!(
            "commsched-scenario 1\nname churn\nhorizon 6 6\nAGENTS\na\nb base\nEND\nTASKS\n\
             t1 required size=1 owner=a\nt2 required after=t1 owner=a\nu required owner=b\nEND\n\
             COSTS\na t1 1 1\na t2 2 2\nb u 1 1\nEND\nCONTACTS\na <-> b 1\nEND\n\
             CONFIG\nexecute 6\nbudget 300\nEND\nSCRIPT\n{off} disable a\n{} enable a\nEND\n",
            off + on
        );
        let s = parse_scenario(&text).unwrap();
        let trace = run_cycles(&s, cycles, false);
        prop_assert_eq!(trace.to_text(), run_cycles(&s, cycles, false).to_text());
        for c in &trace.cycles {
            for t in c.pool.iter().filter(|t| !is_hold(t)) {
                let done = c.executed.iter().any(|e| &e.task == t);
                let pending = c.carried.contains(t);
                prop_assert!(done || pending, "cycle {}: {} vanished", c.cycle, t);
            }
        }
    }
}
