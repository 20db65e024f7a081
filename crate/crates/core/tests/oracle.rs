mod common;

use commsched::baseline::{selfish_schedule, SelfishMode};
use commsched::encoder::{encode, EncodeError};
use commsched::solver::{brute_force, solve, BruteError, SolveBudget, SolveStatus};
use commsched::verify::check_schedule;

#[test]
fn solver_matches_brute_force_on_small_instances() {
    for seed in 0..120u64 {
        let p = common::random_small(seed, common::objective_for(seed as usize));
        let brute = brute_force(&p, false);
        let inst = match encode(&p, false) {
            Ok(i) => i,
            Err(EncodeError::InfeasibleHorizon(_)) => {
                assert_eq!(brute, Err(BruteError::Infeasible), "seed {seed}");
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let seed_sched = selfish_schedule(&p, SelfishMode::Strict).ok();
        let r = solve(&inst, seed_sched.as_ref(), &SolveBudget::nodes(50_000_000)).unwrap();
        match brute {
            Ok(b) => {
                check_schedule(&p, &b, false).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
                assert_eq!(
                    r.incumbent_value,
                    Some(b.objective_value),
                    "seed {seed}: {}",
                    r
                );
                check_schedule(&p, r.incumbent.as_ref().unwrap(), false).unwrap();
            }
            Err(_) => assert_eq!(r.status, SolveStatus::InfeasibleProven, "seed {seed}"),
        }
    }
}

#[test]
fn interference_mode_matches_brute_force() {
    for seed in 0..120u64 {
        let p =
            common::random_small_interference(1000 + seed, common::objective_for(seed as usize));
        let brute = brute_force(&p, true);
        let inst = match encode(&p, true) {
            Ok(i) => i,
            Err(EncodeError::InfeasibleHorizon(_)) => {
                assert_eq!(brute, Err(BruteError::Infeasible), "seed {seed}");
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let r = solve(&inst, None, &SolveBudget::nodes(50_000_000)).unwrap();
        match brute {
            Ok(b) => {
                check_schedule(&p, &b, true).unwrap_or_else(|e| panic!("seed {seed} brute: {e:?}"));
                assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
                assert_eq!(
                    r.incumbent_value,
                    Some(b.objective_value),
                    "seed {seed}: {}",
                    r
                );
                check_schedule(&p, r.incumbent.as_ref().unwrap(), true).unwrap();
            }
            Err(_) => assert_eq!(r.status, SolveStatus::InfeasibleProven, "seed {seed}"),
        }
    }
}
