//! Builds a small instance in code, solves it for each objective and checks
//! the answer against exhaustive search.
//!
//! cargo run --example custom_problem

use commsched::encoder::encode;
use commsched::model::*;
use commsched::rational::{format_q, q};
use commsched::solver::{brute_force, solve, SolveBudget};
use commsched::verify::check_schedule;

fn main() {
    let net = SoftwareNetwork::new(vec![
        Task::required("sense").size(q(4)).owned_by("rover"),
        Task::required("map").after(&["sense"]).size(q(2)),
        Task::optional("science", q(10))
            .after(&["map"])
            .owned_by("rover"),
    ])
    .unwrap();
    let agents = vec![
        AgentProfile::new("rover")
            .with_cost("sense", q(1), q(2))
            .with_cost("map", q(3), q(6))
            .with_cost("science", q(1), q(1)),
        AgentProfile::new("lander")
            .base_station()
            .with_cost("map", q(1), q(1)),
    ];
    let mut contacts = ContactGraph::new(2, 6);
    contacts.set_symmetric(0, 1, q(4));

    for objective in [
        Objective::OptionalReward,
        Objective::Makespan,
        Objective::Energy,
    ] {
        let p = ProblemInstance::new(
            net.clone(),
            agents.clone(),
            contacts.clone(),
            Horizon::unit_steps(6),
            objective.clone(),
        )
        .unwrap();
        assert!(validate_problem(&p).is_admissible());
        let r = solve(&encode(&p, false).unwrap(), None, &SolveBudget::default()).unwrap();
        let s = r.incumbent.clone().unwrap();
        check_schedule(&p, &s, false).unwrap();
        let exact = brute_force(&p, false).unwrap();
        println!(
            "{}: {r} (exhaustive {})",
            objective.name(),
            format_q(&exact.objective_value)
        );
        print!("{s}");
    }
}
