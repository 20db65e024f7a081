//! Compares shared schedules with the selfish allocation on generated rover
//! teams.
//!
//! cargo run --release --example shared_vs_selfish

use commsched::baseline::compare;
use commsched::cli::solve_against_selfish;
use commsched::rational::{format_q, qf};
use commsched::scenarios::generate_random;
use commsched::solver::SolveBudget;

fn main() {
    for seed in 0..6 {
        let s = generate_random(3 + seed as usize, qf(1, 2), 3, seed);
        let p = s.to_problem().unwrap();
        let (r, selfish) = solve_against_selfish(&p, false, &SolveBudget::nodes(1_000)).unwrap();
        let m = compare(&p, r.incumbent.as_ref().unwrap(), selfish.as_ref().unwrap());
        let ratio = m
            .ratio()
            .map(|r| format_q(&r))
            .unwrap_or_else(|| "-".into());
        println!(
            "{} ({}, {} nodes) ratio {ratio}",
            s.name,
            r.status.as_str(),
            r.nodes_explored
        );
        print!("{m}");
    }
}
