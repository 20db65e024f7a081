use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distsim::{CycleConfig, WorldScript};
use crate::model::Objective;
use crate::rational::{q, Q};

use super::{
    puffer_costs, puffer_network, AgentSpec, ContactModel, Point, PufferCosts, PufferSizes,
    ScenarioFile,
};

const FIELD: i128 = 40;

/// A geometric rover team: one base station and `num_agents - 1` rovers at
/// random integer positions in a 80 m square, with `science_fraction` of
/// the rovers (rounded) in science zones holding `samples_per_zone` slots.
/// Half of the seeds also get one square obstacle.
pub fn generate_random(
    num_agents: usize,
    science_fraction: Q,
    samples_per_zone: u32,
    seed: u64,
) -> ScenarioFile {
    assert!(
        (2..=50).contains(&num_agents),
        "num_agents must be in 2..=50"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rovers: Vec<String> = (1..num_agents).map(|i| format!("r{i}")).collect();
    let base = "base".to_string();
    let mut pos = || {
        Point::new(
            q(rng.gen_range(-FIELD..=FIELD)),
            q(rng.gen_range(-FIELD..=FIELD)),
        )
    };
    let mut agents = vec![AgentSpec {
        position: Some(pos()),
        base_station: true,
        ..AgentSpec::new(&base)
    }];
    for r in &rovers {
        agents.push(AgentSpec {
            position: Some(pos()),
            ..AgentSpec::new(r)
        });
    }
    let frac = science_fraction.max(q(0)).min(q(1));
    let count = (frac * q(rovers.len() as i128)).round().to_integer() as usize;
    let mut order: Vec<usize> = (0..rovers.len()).collect();
    for i in 0..count {
        let j = rng.gen_range(i..order.len());
        order.swap(i, j);
    }
    let mut samples = vec![0u32; rovers.len()];
    for &r in &order[..count] {
        samples[r] = samples_per_zone;
        agents[r + 1].science = samples_per_zone > 0;
    }
    let mut obstacles = Vec::new();
    if rng.gen_bool(0.5) {
        let (cx, cy) = (rng.gen_range(-FIELD..=FIELD), rng.gen_range(-FIELD..=FIELD));
        let h = rng.gen_range(2..=8);
        obstacles.push(vec![
            Point::new(q(cx - h), q(cy - h)),
            Point::new(q(cx + h), q(cy - h)),
            Point::new(q(cx + h), q(cy + h)),
            Point::new(q(cx - h), q(cy + h)),
        ]);
    }
    ScenarioFile {
        name: format!("random-n{num_agents}-s{seed}"),
        horizon_seconds: q(20),
        steps: 20,
        objective: Objective::OptionalReward,
        agents,
        tasks: puffer_network(&rovers, &base, &samples, &PufferSizes::default()),
        costs: puffer_costs(&rovers, &base, &samples, &PufferCosts::default()),
        contacts: ContactModel::Geometric {
            obstacles,
            moves: Vec::new(),
        },
        interference: Vec::new(),
        comm_energy: Vec::new(),
        config: CycleConfig::default(),
        script: WorldScript::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_problem;
    use crate::scenarios::parse_scenario;

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_random(6, q(1) / q(2), 3, 9);
        let b = generate_random(6, q(1) / q(2), 3, 9);
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(
            a.to_text(),
            generate_random(6, q(1) / q(2), 3, 10).to_text()
        );
        assert_eq!(parse_scenario(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..5 {
            let s = generate_random(4, q(1) / q(3), 3, seed);
            let science = s.agents.iter().filter(|a| a.science).count();
            assert_eq!(science, 1);
            let p = s.to_problem().unwrap();
            assert!(validate_problem(&p).is_admissible(), "seed {seed}");
        }
    }

    #[test]
    fn no_science_means_no_optional_tasks() {
        let s = generate_random(5, q(0), 3, 1);
        assert!(s.tasks.iter().all(|t| t.required));
    }
}
