//! Writes SVG timelines for the assembly line schedule and a relay trace.
//!
//! cargo run --example render_timeline [out-dir]

use std::path::PathBuf;

use commsched::distsim::run_cycles;
use commsched::encoder::encode;
use commsched::render::{gantt_from_trace, render_svg, Gantt};
use commsched::scenarios::{canned_scenario, parse_schedule, write_schedule};
use commsched::solver::{solve, SolveBudget};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir).unwrap();

    let p = canned_scenario("assembly_line")
        .unwrap()
        .to_problem()
        .unwrap();
    let r = solve(&encode(&p, false).unwrap(), None, &SolveBudget::default()).unwrap();
    let parsed = parse_schedule(&write_schedule(&p, &r)).unwrap();
    let svg = render_svg(&Gantt::from_schedule("assembly_line", &parsed));
    std::fs::write(dir.join("assembly_line.svg"), svg).unwrap();

    let trace = run_cycles(&canned_scenario("relay").unwrap(), 3, false);
    let g = gantt_from_trace(&trace.to_text()).unwrap();
    std::fs::write(dir.join("relay_trace.svg"), render_svg(&g)).unwrap();
    println!(
        "wrote {}/assembly_line.svg and relay_trace.svg",
        dir.display()
    );
}
