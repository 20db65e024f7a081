//! Line-based scenario and schedule text formats.
//!
//! ```text
//! commsched-scenario 1
//! name relay
//! horizon 5 5
//! objective reward
//! AGENTS
//! a science pos=0,0
//! b base
//! END
//! TASKS
//! sample optional reward=5 size=1 owner=a kind=collect
//! store optional reward=20 after=sample owner=b kind=store
//! END
//! COSTS
//! a sample 1 1
//! b store 1 1/2
//! END
//! CONTACTS
//! a -> b 1
//! b -> a 0,0,5,5
//! END
//! ```
//!
//! `#` starts a comment. Sections are AGENTS, TASKS, COSTS, CONTACTS or
//! GEOMETRY, INTERFERENCE, COMMENERGY, CONFIG and SCRIPT, each closed by `END`.

use std::time::Duration;

use crate::distsim::{CycleConfig, EventKind, ScriptEvent, WorldScript};
use crate::model::{
    BaseObjective, CommEvent, Objective, Placement, ProblemInstance, Schedule, Task, TaskKind,
};
use crate::rational::{format_q, parse_q, Q};
use crate::solver::{SolveBudget, SolveResult};
use crate::verify::occupancy;

use super::{
    AgentSpec, ContactModel, CostEntry, InterferenceSpec, LinkSpec, Move, Point, RateSpec,
    ScenarioError, ScenarioFile,
};

pub const SCENARIO_HEADER: &str = "commsched-scenario 1";
pub const SCHEDULE_HEADER: &str = "commsched-schedule 1";

fn err(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        msg: msg.into(),
    }
}

fn num(line: usize, s: &str) -> Result<Q, ScenarioError> {
    parse_q(s).ok_or_else(|| err(line, format!("bad number `{s}`")))
}

fn int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ScenarioError> {
    s.parse()
        .map_err(|_| err(line, format!("bad integer `{s}`")))
}

fn ident(line: usize, s: &str) -> Result<String, ScenarioError> {
    if s.is_empty() || s.contains([',', '=', '>']) || s.starts_with('-') {
        return Err(err(line, format!("bad identifier `{s}`")));
    }
    Ok(s.to_string())
}

fn point(line: usize, s: &str) -> Result<Point, ScenarioError> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| err(line, format!("bad point `{s}`")))?;
    Ok(Point::new(num(line, x)?, num(line, y)?))
}

fn fmt_point(p: &Point) -> String {
    format!("{},{}", format_q(&p.x), format_q(&p.y))
}

fn rate_spec(line: usize, s: &str) -> Result<RateSpec, ScenarioError> {
    if s.contains(',') {
        Ok(RateSpec::PerStep(
            s.split(',')
                .map(|r| num(line, r))
                .collect::<Result<_, _>>()?,
        ))
    } else {
        Ok(RateSpec::Constant(num(line, s)?))
    }
}

fn fmt_rate(r: &RateSpec) -> String {
    match r {
        RateSpec::Constant(v) => format_q(v),
        RateSpec::PerStep(v) => v.iter().map(format_q).collect::<Vec<_>>().join(","),
    }
}

fn objective(line: usize, words: &[&str]) -> Result<Objective, ScenarioError> {
    match words {
        ["reward"] => Ok(Objective::OptionalReward),
        ["makespan"] => Ok(Objective::Makespan),
        ["energy"] => Ok(Objective::Energy),
        ["weighted", rest @ ..] => {
            let mut w = Vec::new();
            for kv in rest {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err(line, format!("bad weight `{kv}`")))?;
                let base = match k {
                    "reward" => BaseObjective::OptionalReward,
                    "makespan" => BaseObjective::Makespan,
                    "energy" => BaseObjective::Energy,
                    _ => return Err(err(line, format!("unknown objective component `{k}`"))),
                };
                w.push((base, num(line, v)?));
            }
            let obj = Objective::Weighted(w);
            if !obj.weights_valid() {
                return Err(err(line, "weights must be non-negative with one positive"));
            }
            Ok(obj)
        }
        _ => Err(err(
            line,
            format!("unknown objective `{}`", words.join(" ")),
        )),
    }
}

pub fn objective_text(o: &Objective) -> String {
    match o {
        Objective::Weighted(w) => {
            let parts: Vec<String> = w
                .iter()
                .map(|(b, v)| format!("{}={}", b.as_str(), format_q(v)))
                .collect();
            format!("weighted {}", parts.join(" "))
        }
        other => other.name().to_string(),
    }
}

/// Parses an objective name as used on the command line and in files.
pub fn parse_objective(s: &str) -> Option<Objective> {
    let words: Vec<&str> = s.split_whitespace().collect();
    objective(0, &words).ok()
}

fn parse_agent(line: usize, words: &[&str]) -> Result<AgentSpec, ScenarioError> {
    let mut a = AgentSpec::new(ident(line, words[0])?);
    for w in &words[1..] {
        match *w {
            "base" => a.base_station = true,
            "science" => a.science = true,
            _ => match w.split_once('=') {
                Some(("pos", v)) => a.position = Some(point(line, v)?),
                _ => return Err(err(line, format!("unknown agent field `{w}`"))),
            },
        }
    }
    Ok(a)
}

fn parse_task(line: usize, words: &[&str]) -> Result<Task, ScenarioError> {
    if words.len() < 2 {
        return Err(err(line, "task needs an id and required|optional"));
    }
    let id = ident(line, words[0])?;
    let mut task = match words[1] {
        "required" => Task::required(id),
        "optional" => Task::optional(id, Q::from_integer(0)),
        other => {
            return Err(err(
                line,
                format!("expected required|optional, got `{other}`"),
            ))
        }
    };
    for w in &words[2..] {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| err(line, format!("unknown task field `{w}`")))?;
        match k {
            "reward" if !task.required => task.reward = num(line, v)?,
            "size" => task.product_size = num(line, v)?,
            "after" => {
                let preds: Vec<String> = v
                    .split(',')
                    .map(|p| ident(line, p))
                    .collect::<Result<_, _>>()?;
                task = task.after(&preds);
            }
            "owner" => task.owner = Some(ident(line, v)?),
            "kind" => {
                task.kind =
                    TaskKind::parse(v).ok_or_else(|| err(line, format!("unknown kind `{v}`")))?
            }
            _ => return Err(err(line, format!("unknown task field `{k}`"))),
        }
    }
    Ok(task)
}

fn parse_link<'a>(
    line: usize,
    words: &[&'a str],
) -> Result<(String, String, bool, &'a str), ScenarioError> {
    match words {
        [a, arrow @ ("->" | "<->"), b, rest] => {
            Ok((ident(line, a)?, ident(line, b)?, *arrow == "<->", rest))
        }
        _ => Err(err(line, "expected `src -> dst value` or `a <-> b value`")),
    }
}

fn parse_event(line: usize, words: &[&str]) -> Result<ScriptEvent, ScenarioError> {
    if words.len() < 3 {
        return Err(err(line, "expected `time kind args`"));
    }
    let time = num(line, words[0])?;
    let (args, forecast) = match words.last() {
        Some(&"forecast") => (&words[1..words.len() - 1], true),
        _ => (&words[1..], false),
    };
    let kind = match args {
        ["rate", a, b, bps] => EventKind::LinkRate {
            a: ident(line, a)?,
            b: ident(line, b)?,
            bps: num(line, bps)?,
        },
        ["cut", a, b] => EventKind::LinkCut {
            a: ident(line, a)?,
            b: ident(line, b)?,
        },
        ["restore", a, b] => EventKind::LinkRestore {
            a: ident(line, a)?,
            b: ident(line, b)?,
        },
        ["disable", a] => EventKind::Disable(ident(line, a)?),
        ["enable", a] => EventKind::Enable(ident(line, a)?),
        ["zone-enter", a] => EventKind::ZoneEnter(ident(line, a)?),
        ["zone-exit", a] => EventKind::ZoneExit(ident(line, a)?),
        _ => {
            return Err(err(
                line,
                format!("unknown script event `{}`", args.join(" ")),
            ))
        }
    };
    Ok(ScriptEvent {
        time,
        kind,
        forecast,
    })
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Top,
    Agents,
    Tasks,
    Costs,
    Contacts,
    Geometry,
    Interference,
    CommEnergy,
    Config,
    Script,
}

/// Parses a scenario file. Structural checks only; instance validation
/// happens when the problem is built.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, l)) if l == SCENARIO_HEADER => {}
        Some((n, l)) => return Err(err(n, format!("expected `{SCENARIO_HEADER}`, got `{l}`"))),
        None => return Err(err(1, "empty scenario")),
    }
    let mut name = None;
    let mut horizon = None;
    let mut objective_v = Objective::OptionalReward;
    let mut agents = Vec::new();
    let mut tasks = Vec::new();
    let mut costs = Vec::new();
    let mut links = Vec::new();
    let mut geometry: Option<(Vec<Vec<Point>>, Vec<Move>)> = None;
    let mut interference = Vec::new();
    let mut comm_energy = Vec::new();
    let mut config = CycleConfig::default();
    let mut events = Vec::new();
    let mut seen = Vec::new();
    let mut section = Section::Top;
    let mut last = 1;
    for (n, l) in lines {
        last = n;
        if l.is_empty() {
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        if section != Section::Top {
            if l == "END" {
                section = Section::Top;
                continue;
            }
        }
        match section {
            Section::Top => {
                let open = match words[0] {
                    "AGENTS" => Some(Section::Agents),
                    "TASKS" => Some(Section::Tasks),
                    "COSTS" => Some(Section::Costs),
                    "CONTACTS" => Some(Section::Contacts),
                    "GEOMETRY" => Some(Section::Geometry),
                    "INTERFERENCE" => Some(Section::Interference),
                    "COMMENERGY" => Some(Section::CommEnergy),
                    "CONFIG" => Some(Section::Config),
                    "SCRIPT" => Some(Section::Script),
                    _ => None,
                };
                if let Some(s) = open {
                    if words.len() != 1 {
                        return Err(err(n, "section headers take no arguments"));
                    }
                    if seen.contains(&words[0]) {
                        return Err(err(n, format!("duplicate section {}", words[0])));
                    }
                    seen.push(words[0]);
                    if s == Section::Geometry {
                        geometry = Some((Vec::new(), Vec::new()));
                    }
                    section = s;
                    continue;
                }
                match words.as_slice() {
                    ["name", v] => name = Some(v.to_string()),
                    ["horizon", secs, steps] => {
                        horizon = Some((num(n, secs)?, int::<u32>(n, steps)?))
                    }
                    ["objective", rest @ ..] => objective_v = objective(n, rest)?,
                    _ => return Err(err(n, format!("unknown field `{l}`"))),
                }
            }
            Section::Agents => agents.push(parse_agent(n, &words)?),
            Section::Tasks => tasks.push(parse_task(n, &words)?),
            Section::Costs => match words.as_slice() {
                [a, t, time, energy] => costs.push(CostEntry {
                    agent: ident(n, a)?,
                    task: ident(n, t)?,
                    time: num(n, time)?,
                    energy: num(n, energy)?,
                }),
                _ => return Err(err(n, "expected `agent task time energy`")),
            },
            Section::Contacts => {
                let (src, dst, symmetric, r) = parse_link(n, &words)?;
                links.push(LinkSpec {
                    src,
                    dst,
                    symmetric,
                    rate: rate_spec(n, r)?,
                });
            }
            Section::Geometry => {
                let g = geometry.as_mut().expect("geometry section open");
                match words.as_slice() {
                    ["obstacle", pts @ ..] if pts.len() >= 3 => {
                        g.0.push(pts.iter().map(|p| point(n, p)).collect::<Result<_, _>>()?)
                    }
                    ["move", t, a, p] => g.1.push(Move {
                        time: num(n, t)?,
                        agent: ident(n, a)?,
                        to: point(n, p)?,
                    }),
                    _ => return Err(err(n, format!("unknown geometry line `{l}`"))),
                }
            }
            Section::Interference => match words.as_slice() {
                ["set", cap, ls @ ..] if !ls.is_empty() => {
                    let mut set = Vec::new();
                    for w in ls {
                        let (s, d) = w
                            .split_once("->")
                            .ok_or_else(|| err(n, format!("bad link `{w}`")))?;
                        set.push((ident(n, s)?, ident(n, d)?));
                    }
                    interference.push(InterferenceSpec {
                        links: set,
                        capacity: rate_spec(n, cap)?,
                    });
                }
                _ => return Err(err(n, "expected `set capacity src->dst ...`")),
            },
            Section::CommEnergy => {
                let (src, dst, symmetric, e) = parse_link(n, &words)?;
                let e = num(n, e)?;
                if symmetric {
                    comm_energy.push((dst.clone(), src.clone(), e));
                }
                comm_energy.push((src, dst, e));
            }
            Section::Config => match words.as_slice() {
                ["broadcast", v] => config.broadcast_s = num(n, v)?,
                ["plan", v] => config.plan_s = num(n, v)?,
                ["execute", v] => config.execute_s = num(n, v)?,
                ["budget", v] => config.budget = SolveBudget::nodes(int(n, v)?),
                ["wall-clock", v] => {
                    config.budget.wall_clock = Some(Duration::from_millis(int(n, v)?))
                }
                ["flood-rate", v] => config.flood_rate_bps = num(n, v)?,
                _ => return Err(err(n, format!("unknown config field `{l}`"))),
            },
            Section::Script => events.push(parse_event(n, &words)?),
        }
    }
    if section != Section::Top {
        return Err(err(last, "missing END"));
    }
    let (horizon_seconds, steps) =
        horizon.ok_or_else(|| err(last, "missing `horizon seconds steps`"))?;
    if steps == 0 || horizon_seconds <= Q::from_integer(0) {
        return Err(err(last, "horizon must be positive"));
    }
    let contacts = match geometry {
        Some(_) if !links.is_empty() => {
            return Err(err(last, "CONTACTS and GEOMETRY are exclusive"))
        }
        Some((obstacles, moves)) => ContactModel::Geometric { obstacles, moves },
        None => ContactModel::Explicit(links),
    };
    let cfg_ok = [
        config.broadcast_s,
        config.plan_s,
        config.execute_s,
        config.flood_rate_bps,
    ]
    .iter()
    .all(|v| *v > Q::from_integer(0));
    if !cfg_ok {
        return Err(err(
            last,
            "cycle phase lengths and flood rate must be positive",
        ));
    }
    let scenario = ScenarioFile {
        name: name.unwrap_or_else(|| "unnamed".into()),
        horizon_seconds,
        steps,
        objective: objective_v,
        agents,
        tasks,
        costs,
        contacts,
        interference,
        comm_energy,
        config,
        script: WorldScript::new(events),
    };
    check_references(&scenario)?;
    Ok(scenario)
}

fn check_references(s: &ScenarioFile) -> Result<(), ScenarioError> {
    let known = |id: &str| s.agent_index(id).is_some();
    let bad = |what: &str, id: &str| {
        Err(ScenarioError::Invalid(format!(
            "{what} references unknown agent `{id}`"
        )))
    };
    for c in &s.costs {
        if !known(&c.agent) {
            return bad("cost row", &c.agent);
        }
    }
    if let ContactModel::Explicit(links) = &s.contacts {
        for l in links {
            for id in [&l.src, &l.dst] {
                if !known(id) {
                    return bad("link", id);
                }
            }
        }
    } else if s.agents.iter().any(|a| a.position.is_none()) {
        return Err(ScenarioError::Invalid(
            "geometric contacts need a position for every agent".into(),
        ));
    }
    for e in s.script.events() {
        let ids: Vec<&String> = match &e.kind {
            EventKind::LinkRate { a, b, .. }
            | EventKind::LinkCut { a, b }
            | EventKind::LinkRestore { a, b } => {
                vec![a, b]
            }
            EventKind::Disable(a)
            | EventKind::Enable(a)
            | EventKind::ZoneEnter(a)
            | EventKind::ZoneExit(a) => vec![a],
        };
        for id in ids {
            if !known(id) {
                return bad("script event", id);
            }
        }
    }
    Ok(())
}

/// Canonical text form; `parse_scenario(write_scenario(s)) == s`.
pub fn write_scenario(s: &ScenarioFile) -> String {
    let mut o = format!("{SCENARIO_HEADER}\nname {}\n", s.name);
    o += &format!("horizon {} {}\n", format_q(&s.horizon_seconds), s.steps);
    o += &format!("objective {}\n", objective_text(&s.objective));
    o += "AGENTS\n";
    for a in &s.agents {
        o += &a.id;
        if a.base_station {
            o += " base";
        }
        if a.science {
            o += " science";
        }
        if let Some(p) = &a.position {
            o += &format!(" pos={}", fmt_point(p));
        }
        o += "\n";
    }
    o += "END\nTASKS\n";
    for t in &s.tasks {
        o += &format!(
            "{} {}",
            t.id,
            if t.required { "required" } else { "optional" }
        );
        if !t.required {
            o += &format!(" reward={}", format_q(&t.reward));
        }
        if t.product_size != Q::from_integer(0) {
            o += &format!(" size={}", format_q(&t.product_size));
        }
        if !t.predecessors.is_empty() {
            o += &format!(" after={}", t.predecessors.join(","));
        }
        if let Some(owner) = &t.owner {
            o += &format!(" owner={owner}");
        }
        if t.kind != TaskKind::Generic {
            o += &format!(" kind={}", t.kind.as_str());
        }
        o += "\n";
    }
    o += "END\nCOSTS\n";
    for c in &s.costs {
        o += &format!(
            "{} {} {} {}\n",
            c.agent,
            c.task,
            format_q(&c.time),
            format_q(&c.energy)
        );
    }
    o += "END\n";
    match &s.contacts {
        ContactModel::Explicit(links) => {
            o += "CONTACTS\n";
            for l in links {
                let arrow = if l.symmetric { "<->" } else { "->" };
                o += &format!("{} {arrow} {} {}\n", l.src, l.dst, fmt_rate(&l.rate));
            }
        }
        ContactModel::Geometric { obstacles, moves } => {
            o += "GEOMETRY\n";
            for poly in obstacles {
                let pts: Vec<String> = poly.iter().map(fmt_point).collect();
                o += &format!("obstacle {}\n", pts.join(" "));
            }
            for m in moves {
                o += &format!(
                    "move {} {} {}\n",
                    format_q(&m.time),
                    m.agent,
                    fmt_point(&m.to)
                );
            }
        }
    }
    o += "END\n";
    if !s.interference.is_empty() {
        o += "INTERFERENCE\n";
        for set in &s.interference {
            let ls: Vec<String> = set.links.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            o += &format!("set {} {}\n", fmt_rate(&set.capacity), ls.join(" "));
        }
        o += "END\n";
    }
    if !s.comm_energy.is_empty() {
        o += "COMMENERGY\n";
        for (a, b, e) in &s.comm_energy {
            o += &format!("{a} -> {b} {}\n", format_q(e));
        }
        o += "END\n";
    }
    let c = &s.config;
    o += "CONFIG\n";
    o += &format!(
        "broadcast {}\nplan {}\nexecute {}\n",
        format_q(&c.broadcast_s),
        format_q(&c.plan_s),
        format_q(&c.execute_s)
    );
    o += &format!("budget {}\n", c.budget.max_nodes);
    if let Some(w) = c.budget.wall_clock {
        o += &format!("wall-clock {}\n", w.as_millis());
    }
    o += &format!("flood-rate {}\nEND\n", format_q(&c.flood_rate_bps));
    if !s.script.is_empty() {
        o += "SCRIPT\n";
        for e in s.script.events() {
            o += &format!("{e}\n");
        }
        o += "END\n";
    }
    o
}

/// Solver output with the agent list, horizon and block ends that the
/// renderer needs.
pub fn write_schedule(p: &ProblemInstance, r: &SolveResult) -> String {
    let mut o = format!("{SCHEDULE_HEADER}\nstatus {}\n", r.status.as_str());
    if let Some(v) = &r.incumbent_value {
        o += &format!("value {}\n", format_q(v));
    }
    if let Some(b) = &r.best_bound {
        o += &format!("bound {}\n", format_q(b));
    }
    o += &format!("nodes {}\n", r.nodes_explored);
    let ids: Vec<&str> = p.agents.iter().map(|a| a.id.as_str()).collect();
    o += &format!("agents {}\nsteps {}\n", ids.join(" "), p.steps());
    if let Some(s) = &r.incumbent {
        o += &format!("makespan {}\n", s.makespan_steps);
        for pl in &s.placements {
            let end = match (p.agent_index(&pl.agent), p.network.index_of(&pl.task)) {
                (Some(a), Some(t)) => pl.start + occupancy(p.duration_steps(a, t).unwrap_or(0)),
                _ => pl.start + 1,
            };
            o += &format!("place {} {} {} {end}\n", pl.agent, pl.task, pl.start);
        }
        for c in &s.comms {
            let bits: Vec<String> = c.bits.iter().map(format_q).collect();
            o += &format!(
                "comm {} {} {} {} {} {}\n",
                c.src,
                c.dst,
                c.task,
                c.start,
                c.end,
                bits.join(",")
            );
        }
    }
    o
}

/// A schedule read back from `commsched-schedule 1` text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedSchedule {
    pub status: Option<String>,
    pub value: Option<Q>,
    pub bound: Option<Q>,
    pub nodes: Option<u64>,
    /// From the `agents` line, else in order of first appearance.
    pub agents: Vec<String>,
    pub steps: Option<u32>,
    /// Recorded end step of each placement, parallel to the placements.
    pub ends: Vec<Option<u32>>,
    pub schedule: Schedule,
}

pub fn parse_schedule(text: &str) -> Result<ParsedSchedule, ScenarioError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, l)) if l == SCHEDULE_HEADER => {}
        Some((n, l)) => return Err(err(n, format!("expected `{SCHEDULE_HEADER}`, got `{l}`"))),
        None => return Err(err(1, "empty schedule")),
    }
    let mut out = ParsedSchedule::default();
    let mut listed = false;
    let seen = |out: &mut ParsedSchedule, listed: bool, a: &str| {
        if !listed && !out.agents.iter().any(|x| x == a) {
            out.agents.push(a.to_string());
        }
    };
    for (n, l) in lines {
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["status", s] => out.status = Some(s.to_string()),
            ["value", v] => out.value = Some(num(n, v)?),
            ["bound", v] => out.bound = Some(num(n, v)?),
            ["nodes", v] => out.nodes = Some(int(n, v)?),
            ["agents", ids @ ..] => {
                out.agents = ids.iter().map(|a| ident(n, a)).collect::<Result<_, _>>()?;
                listed = true;
            }
            ["makespan", v] => out.schedule.makespan_steps = int(n, v)?,
            ["steps", v] => out.steps = Some(int(n, v)?),
            ["place", a, t, k, end @ ..] if end.len() <= 1 => {
                seen(&mut out, listed, a);
                out.schedule.placements.push(Placement {
                    agent: ident(n, a)?,
                    task: ident(n, t)?,
                    start: int(n, k)?,
                });
                out.ends.push(end.first().map(|e| int(n, e)).transpose()?);
            }
            ["comm", s, d, t, start, end, bits] => {
                seen(&mut out, listed, s);
                seen(&mut out, listed, d);
                let bits: Vec<Q> = bits
                    .split(',')
                    .map(|b| num(n, b))
                    .collect::<Result<_, _>>()?;
                let (start, end): (u32, u32) = (int(n, start)?, int(n, end)?);
                if end < start || bits.len() != (end - start) as usize {
                    return Err(err(n, "comm bits must cover start..end"));
                }
                out.schedule.comms.push(CommEvent {
                    src: ident(n, s)?,
                    dst: ident(n, d)?,
                    task: ident(n, t)?,
                    start,
                    end,
                    bits,
                });
            }
            _ => return Err(err(n, format!("unknown schedule line `{l}`"))),
        }
    }
    if let Some(v) = out.value {
        out.schedule.objective_value = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    const SAMPLE: &str = "\
commsched-scenario 1
name tiny   # a comment
horizon 4 4
objective weighted reward=1 energy=1/10
AGENTS
a science pos=0,0
b base pos=3,0
END
TASKS
t1 required size=1e6 owner=a
t2 optional reward=5 after=t1 kind=analyze
END
COSTS
a t1 1 1
b t2 2 1/2
END
GEOMETRY
obstacle 1,5 2,5 2,6
move 2 a 1,0
END
CONFIG
budget 50
END
SCRIPT
3 cut a b forecast
1 disable b
END
";

    #[test]
    fn round_trip() {
        let s = parse_scenario(SAMPLE).unwrap();
        assert_eq!(s.agents.len(), 2);
        assert_eq!(s.tasks[0].product_size, q(1_000_000));
        assert_eq!(s.config.budget.max_nodes, 50);
        assert_eq!(s.script.events()[0].time, q(1));
        let again = parse_scenario(&s.to_text()).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_text(), s.to_text());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = SAMPLE.replace("kind=analyze", "colour=red");
        assert!(matches!(
            parse_scenario(&bad),
            Err(ScenarioError::Parse { line: 11, .. })
        ));
        let bad = SAMPLE.replace("budget 50", "budgett 50");
        assert!(parse_scenario(&bad).is_err());
        let bad = SAMPLE.replace("name tiny", "title tiny");
        assert!(parse_scenario(&bad).is_err());
        let bad = SAMPLE.replace("science pos", "sciencey pos");
        assert!(parse_scenario(&bad).is_err());
    }

    #[test]
    fn structural_errors() {
        assert!(parse_scenario("").is_err());
        assert!(parse_scenario("commsched-scenario 2\n").is_err());
        assert!(parse_scenario(
            &SAMPLE.replace("SCRIPT\n3 cut a b forecast\n1 disable b\nEND\n", "SCRIPT\n")
        )
        .is_err());
        assert!(matches!(
            parse_scenario(&SAMPLE.replace("disable b", "disable z")),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn schedule_text_round_trip() {
        let text = "commsched-schedule 1\nstatus optimal\nvalue 5\nbound 5\nnodes 3\nmakespan 4\n\
                    place a t1 0\nplace b t2 2\ncomm a b t1 1 2 1\n";
        let p = parse_schedule(text).unwrap();
        assert_eq!(p.agents, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(p.schedule.placements.len(), 2);
        assert_eq!(p.schedule.comms[0].bits, vec![q(1)]);
        assert_eq!(p.value, Some(q(5)));
        assert!(parse_schedule("commsched-schedule 1\ncomm a b t 1 3 1\n").is_err());
    }
}
