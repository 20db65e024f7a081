//! Prints the relay integer program in LP format with its row counts.
//!
//! cargo run --example export_lp > relay.lp

use commsched::encoder::{encode, export_lp};
use commsched::scenarios::canned_scenario;

fn main() {
    let p = canned_scenario("relay").unwrap().to_problem().unwrap();
    let inst = encode(&p, false).unwrap();
    eprintln!(
        "{} columns, {} binary",
        inst.num_columns(),
        inst.num_binaries()
    );
    for (kind, n) in inst.row_counts() {
        eprintln!("  {kind:12} {n}");
    }
    print!("{}", export_lp(&inst));
}
