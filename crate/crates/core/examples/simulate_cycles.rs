//! Runs the broadcast-plan-execute loop on the data mule and prints the trace.
//!
//! cargo run --example simulate_cycles [cycles]

use commsched::distsim::run_cycles;
use commsched::scenarios::canned_scenario;

fn main() {
    let cycles = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2);
    let trace = run_cycles(&canned_scenario("data_mule").unwrap(), cycles, false);
    print!("{}", trace.to_text());
    for c in &trace.cycles {
        println!(
            "cycle {}: consensus {} digests {:?} delivered {} missed {}",
            c.cycle,
            c.consensus(),
            c.digests().iter().map(|d| &d[..8]).collect::<Vec<_>>(),
            c.delivered.len(),
            c.missed.len()
        );
    }
    assert!(trace.agreement_ok());
}
