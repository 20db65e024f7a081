//! Generates a rover team scenario file and reads it back.
//!
//! cargo run --example random_scenario [agents] [seed]

use commsched::rational::qf;
use commsched::scenarios::{generate_random, parse_scenario};

fn main() {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let s = generate_random(n, qf(1, 2), 3, seed);
    let text = s.to_text();
    assert_eq!(parse_scenario(&text).unwrap(), s);
    print!("{text}");
    let p = s.to_problem().unwrap();
    eprintln!(
        "{} agents, {} tasks, {} steps",
        p.num_agents(),
        p.num_tasks(),
        p.steps()
    );
}
