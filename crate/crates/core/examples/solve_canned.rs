//! Solves every built-in scenario and prints the schedule.
//!
//! cargo run --example solve_canned

use commsched::encoder::encode;
use commsched::scenarios::{canned_scenario, write_schedule, CANNED};
use commsched::solver::{solve, SolveBudget};

fn main() {
    for name in CANNED {
        let p = canned_scenario(name).unwrap().to_problem().unwrap();
        let inst = encode(&p, false).unwrap();
        let r = solve(&inst, None, &SolveBudget::nodes(200_000)).unwrap();
        println!("== {name}: {r}");
        print!("{}", write_schedule(&p, &r));
        println!();
    }
}
