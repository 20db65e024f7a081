//! Two senders share one channel: with interference modelling they take
//! turns, without it they transmit together.
//!
//! cargo run --example interference

use commsched::encoder::encode;
use commsched::model::*;
use commsched::rational::q;
use commsched::solver::{solve, SolveBudget};

fn main() {
    let net = SoftwareNetwork::new(vec![
        Task::required("a1").size(q(4)).owned_by("a"),
        Task::required("b1").size(q(4)).owned_by("b"),
        Task::optional("fuse", q(10)).after(&["a1"]).owned_by("c"),
        Task::optional("log", q(10)).after(&["b1"]).owned_by("d"),
    ])
    .unwrap();
    let agents = vec![
        AgentProfile::new("a").with_cost("a1", q(1), q(1)),
        AgentProfile::new("b").with_cost("b1", q(1), q(1)),
        AgentProfile::new("c").with_cost("fuse", q(1), q(1)),
        AgentProfile::new("d").with_cost("log", q(1), q(1)),
    ];
    let mut cg = ContactGraph::new(4, 4);
    cg.set_constant(0, 2, q(4));
    cg.set_constant(1, 3, q(4));
    cg.interference.push(InterferenceSet {
        links: vec![(0, 2), (1, 3)],
        capacity: vec![q(4); 4],
    });
    let p = ProblemInstance::new(
        net,
        agents,
        cg,
        Horizon::unit_steps(4),
        Objective::OptionalReward,
    )
    .unwrap();
    for interference in [false, true] {
        let r = solve(
            &encode(&p, interference).unwrap(),
            None,
            &SolveBudget::default(),
        )
        .unwrap();
        println!("interference {interference}: {r}");
        print!("{}", r.incumbent.unwrap());
    }
}
