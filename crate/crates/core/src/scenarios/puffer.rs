use crate::model::{Task, TaskKind};
use crate::rational::{q, qf, Q};

use super::CostEntry;

pub const REWARD_COLLECT: i128 = 5;
pub const REWARD_ANALYZE: i128 = 10;
pub const REWARD_STORE: i128 = 20;

/// Data product sizes in bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PufferSizes {
    pub image: Q,
    pub pose: Q,
    pub path: Q,
    pub sample: Q,
    pub analysis: Q,
}

impl Default for PufferSizes {
    fn default() -> Self {
        PufferSizes {
            image: q(1_000_000),
            pose: q(100_000),
            path: q(100_000),
            sample: q(1_000_000),
            analysis: q(100_000),
        }
    }
}

/// Compute times in seconds and energy per second of compute, for rovers
/// and for the base station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PufferCosts {
    pub capture: Q,
    pub localize: Q,
    pub plan: Q,
    pub drive: Q,
    pub collect: Q,
    pub analyze: Q,
    pub store: Q,
    pub rover_power: Q,
    pub base_power: Q,
}

impl Default for PufferCosts {
    /// Localization plus planning costs twice one sample collection.
    fn default() -> Self {
        PufferCosts {
            capture: q(1),
            localize: q(3),
            plan: q(3),
            drive: q(1),
            collect: q(3),
            analyze: q(3),
            store: q(1),
            rover_power: q(1),
            base_power: qf(1, 2),
        }
    }
}

pub fn task_id(kind: &str, rover: &str) -> String {
    format!("{kind}.{rover}")
}

pub fn sample_id(kind: &str, rover: &str, slot: u32) -> String {
    format!("{kind}.{rover}.{slot}")
}

/// Housekeeping chain per rover and, for `samples[r]` slots, the science
/// chain collect -> analyze -> store. Capture, drive and collect belong to
/// the rover, store to the base station.
pub fn puffer_network(
    rovers: &[String],
    base: &str,
    samples: &[u32],
    sizes: &PufferSizes,
) -> Vec<Task> {
    let mut tasks = Vec::new();
    for (r, rover) in rovers.iter().enumerate() {
        let capture = task_id("capture", rover);
        let localize = task_id("localize", rover);
        let plan = task_id("plan", rover);
        tasks.push(Task::required(&capture).size(sizes.image).owned_by(rover));
        tasks.push(
            Task::required(&localize)
                .size(sizes.pose)
                .after(&[&capture])
                .owned_by(rover),
        );
        tasks.push(
            Task::required(&plan)
                .size(sizes.path)
                .after(&[&localize])
                .owned_by(rover),
        );
        tasks.push(
            Task::required(task_id("drive", rover))
                .after(&[&plan])
                .owned_by(rover),
        );
        for s in 0..samples.get(r).copied().unwrap_or(0) {
            let collect = sample_id("collect", rover, s);
            let analyze = sample_id("analyze", rover, s);
            tasks.push(
                Task::optional(&collect, q(REWARD_COLLECT))
                    .size(sizes.sample)
                    .owned_by(rover)
                    .kind(TaskKind::Collect),
            );
            tasks.push(
                Task::optional(&analyze, q(REWARD_ANALYZE))
                    .size(sizes.analysis)
                    .after(&[&collect])
                    .owned_by(rover)
                    .kind(TaskKind::Analyze),
            );
            tasks.push(
                Task::optional(sample_id("store", rover, s), q(REWARD_STORE))
                    .after(&[&analyze])
                    .owned_by(base)
                    .kind(TaskKind::Store),
            );
        }
    }
    tasks
}

/// Cost rows: relocatable work (localize, plan, analyze) runs anywhere,
/// capture/drive/collect only on board, store only on the base station.
pub fn puffer_costs(
    rovers: &[String],
    base: &str,
    samples: &[u32],
    c: &PufferCosts,
) -> Vec<CostEntry> {
    let mut out = Vec::new();
    let mut push = |agent: &str, task: String, time: Q, power: Q| {
        out.push(CostEntry {
            agent: agent.to_string(),
            task,
            time,
            energy: time * power,
        });
    };
    let everyone: Vec<(&str, Q)> = rovers
        .iter()
        .map(|r| (r.as_str(), c.rover_power))
        .chain(std::iter::once((base, c.base_power)))
        .collect();
    for (r, rover) in rovers.iter().enumerate() {
        push(rover, task_id("capture", rover), c.capture, c.rover_power);
        push(rover, task_id("drive", rover), c.drive, c.rover_power);
        for &(agent, power) in &everyone {
            push(agent, task_id("localize", rover), c.localize, power);
            push(agent, task_id("plan", rover), c.plan, power);
        }
        for s in 0..samples.get(r).copied().unwrap_or(0) {
            push(
                rover,
                sample_id("collect", rover, s),
                c.collect,
                c.rover_power,
            );
            for &(agent, power) in &everyone {
                push(agent, sample_id("analyze", rover, s), c.analyze, power);
            }
            push(base, sample_id("store", rover, s), c.store, c.base_power);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SoftwareNetwork;

    #[test]
    fn one_rover_without_science_is_a_chain() {
        let net = SoftwareNetwork::new(puffer_network(
            &["r".into()],
            "b",
            &[],
            &PufferSizes::default(),
        ))
        .unwrap();
        assert_eq!(net.len(), 4);
        let ids: Vec<&str> = net.tasks().iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["capture.r", "localize.r", "plan.r", "drive.r"]);
        for t in 1..4 {
            assert_eq!(net.pred_indices(t), vec![t - 1]);
        }
    }

    #[test]
    fn three_rovers_one_science_zone() {
        let rovers: Vec<String> = ["r1", "r2", "r3"].iter().map(|s| s.to_string()).collect();
        let tasks = puffer_network(&rovers, "b", &[3, 0, 0], &PufferSizes::default());
        assert_eq!(tasks.iter().filter(|t| t.required).count(), 12);
        assert_eq!(tasks.iter().filter(|t| !t.required).count(), 9);
        let rewards: Vec<Q> = tasks
            .iter()
            .filter(|t| !t.required)
            .take(3)
            .map(|t| t.reward)
            .collect();
        assert_eq!(rewards, vec![q(5), q(10), q(20)]);
    }

    #[test]
    fn relocatable_housekeeping_is_twice_a_sample() {
        let c = PufferCosts::default();
        assert_eq!(c.localize + c.plan, q(2) * c.collect);
    }
}
