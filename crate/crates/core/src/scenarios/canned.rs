use super::{parse_scenario, ScenarioError, ScenarioFile};

pub const CANNED: [&str; 4] = ["relay", "science_cluster", "assembly_line", "data_mule"];

/// The direct link is cut, so the sample has to hop through `r`.
const RELAY: &str = "\
commsched-scenario 1
name relay
horizon 5 5
objective reward
AGENTS
a science
r
b base
END
TASKS
sample optional reward=5 size=1 owner=a kind=collect
store optional reward=20 after=sample owner=b kind=store
END
COSTS
a sample 1 1
b store 1 1
END
CONTACTS
a <-> r 1
r <-> b 1
a <-> b 1
END
CONFIG
execute 5
END
SCRIPT
0 cut a b forecast
END
";

/// Housekeeping on `s` is long enough that only offloading frees time for
/// more than one sample.
const SCIENCE_CLUSTER: &str = "\
commsched-scenario 1
name science_cluster
horizon 13 13
objective reward
AGENTS
s science
h
b base
END
TASKS
capture.s required size=1e6 owner=s
localize.s required size=1e5 after=capture.s owner=s
plan.s required size=1e5 after=localize.s owner=s
drive.s required after=plan.s owner=s
collect.s.0 optional reward=5 owner=s kind=collect
collect.s.1 optional reward=5 owner=s kind=collect
collect.s.2 optional reward=5 owner=s kind=collect
END
COSTS
s capture.s 1 1
s localize.s 3 3
s plan.s 3 3
s drive.s 1 1
s collect.s.0 3 3
s collect.s.1 3 3
s collect.s.2 3 3
h localize.s 3 3
h plan.s 3 3
b localize.s 3 3/2
b plan.s 3 3/2
END
CONTACTS
s <-> h 1e6
s <-> b 1e6
h <-> b 1e6
END
CONFIG
execute 13
END
";

/// The analysis only meets the deadline when it runs on the middle rover.
const ASSEMBLY_LINE: &str = "\
commsched-scenario 1
name assembly_line
horizon 5 5
objective reward
AGENTS
r1 science
r2
b base
END
TASKS
collect optional reward=5 size=2 owner=r1 kind=collect
analyze optional reward=10 size=1 after=collect owner=r1 kind=analyze
store optional reward=20 after=analyze owner=b kind=store
END
COSTS
r1 collect 1 1
r1 analyze 2 2
r2 analyze 1 1
b analyze 1 1
b store 1 1
END
CONTACTS
r1 <-> r2 2
r2 <-> b 1
END
CONFIG
execute 5
END
";

/// The rover sees the mule early and the mule sees the base late; the
/// mule-to-base window is known in advance.
const DATA_MULE: &str = "\
commsched-scenario 1
name data_mule
horizon 8 8
objective reward
AGENTS
r science
m
b base
END
TASKS
sample optional reward=5 size=1 owner=r kind=collect
store optional reward=20 after=sample owner=b kind=store
END
COSTS
r sample 1 1
b store 1 1
END
CONTACTS
r <-> m 1,1,1,0,0,0,0,0
END
CONFIG
execute 8
END
SCRIPT
4 rate m b 1 forecast
7 cut m b forecast
END
";

pub fn canned_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "relay" => RELAY,
        "science_cluster" => SCIENCE_CLUSTER,
        "assembly_line" => ASSEMBLY_LINE,
        "data_mule" => DATA_MULE,
        _ => return None,
    })
}

pub fn canned_scenario(name: &str) -> Result<ScenarioFile, ScenarioError> {
    let text = canned_text(name).ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))?;
    parse_scenario(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::model::validate_problem;
    use crate::rational::q;
    use crate::solver::{brute_force, solve, SolveBudget, SolveStatus};

    #[test]
    fn all_canned_scenarios_validate() {
        for name in CANNED {
            let s = canned_scenario(name).unwrap();
            assert_eq!(s.name, name);
            let p = s.to_problem().unwrap();
            assert!(validate_problem(&p).is_admissible(), "{name}");
            assert_eq!(parse_scenario(&s.to_text()).unwrap(), s);
        }
        assert!(matches!(
            canned_scenario("nope"),
            Err(ScenarioError::UnknownScenario(_))
        ));
    }

    #[test]
    fn small_canned_optima_match_brute_force() {
        for (name, best) in [("relay", 25), ("assembly_line", 35), ("data_mule", 25)] {
            let p = canned_scenario(name).unwrap().to_problem().unwrap();
            let exact = brute_force(&p, false).unwrap();
            assert_eq!(exact.objective_value, q(best), "{name}");
            let inst = encode(&p, false).unwrap();
            let r = solve(&inst, None, &SolveBudget::default()).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "{name}");
            assert_eq!(r.incumbent_value, Some(q(best)), "{name}");
        }
    }
}
