//! Floods agent states over a ring and compares the time taken with the
//! analytical bound.
//!
//! cargo run --example flooding

use commsched::distsim::{flood, flooding_time_bound, state_bits, AgentState};
use commsched::rational::{format_q, q, to_f64};

fn main() {
    let rate = q(5_000);
    for n in [2, 5, 10, 20] {
        let states: Vec<Option<AgentState>> = (0..n)
            .map(|i| {
                Some(AgentState {
                    agent: format!("a{i}"),
                    bandwidth_levels: vec![1; n],
                    ..Default::default()
                })
            })
            .collect();
        let out = flood(&states, |_, i, j| (i + 1) % n == j, n as u32);
        let t = out.elapsed(state_bits(n), rate);
        let bound = flooding_time_bound(n, rate);
        println!(
            "n={n:2} rounds {:?} time {:.4}s bound {} ({:.4}s)",
            out.rounds_used,
            to_f64(&t),
            format_q(&bound),
            to_f64(&bound)
        );
    }
}
