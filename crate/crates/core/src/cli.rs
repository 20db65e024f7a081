//! Command-line front end. Exit codes: 0 ok, 1 output error, 2 bad input,
//! 3 infeasible, 4 agents disagreed on a plan.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::baseline::{compare, selfish_schedule, SelfishMode};
use crate::distsim::run_cycles;
use crate::encoder::{encode, export_lp, EncodeError};
use crate::model::{validate_problem, BaseObjective, Objective, ProblemInstance, Schedule};
use crate::rational::{format_q, parse_q, Q};
use crate::render::{gantt_from_trace, render_svg, Gantt};
use crate::scenarios::{
    canned_scenario, generate_random, parse_objective, parse_scenario, parse_schedule,
    write_schedule, ScenarioFile,
};
use crate::solver::{solve, SolveBudget, SolveResult, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_AGREEMENT: i32 = 4;

pub const BENCHMARK_HEADER: &str = "scenario,budget,objective,status,shared_value,selfish_value,\
shared_collected,selfish_collected,shared_analyzed,selfish_analyzed,shared_stored,selfish_stored,\
shared_avg_energy,selfish_avg_energy,shared_makespan,selfish_makespan,shared_bits,nodes,wall_ms,error";

#[derive(Debug, Parser)]
#[command(
    name = "commsched",
    version,
    about = "Communication-aware task scheduling for agent teams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario and write the schedule.
    Solve(SolveArgs),
    /// Run the broadcast-plan-execute cycle against the scenario script.
    Simulate(SimulateArgs),
    /// Compare shared and selfish schedules over a set of scenarios.
    Benchmark(BenchmarkArgs),
    /// Draw a schedule or trace as an SVG timeline.
    Render(RenderArgs),
    /// Export the integer program in LP format.
    Lp(LpArgs),
    /// Write a random geometric rover scenario.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Scenario file, or `canned:NAME`.
    pub scenario: String,
    /// reward, makespan, energy or weighted (optionally with weights).
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long = "budget-nodes", default_value_t = 100_000)]
    pub budget_nodes: u64,
    #[arg(long)]
    pub interference: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: String,
    #[arg(long, default_value_t = 3)]
    pub cycles: u32,
    #[arg(long)]
    pub interference: bool,
    /// Directory for `trace.txt` and `digests.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Glob of scenario files; `canned:NAME` entries are also accepted.
    #[arg(required = true)]
    pub scenarios: Vec<String>,
    #[arg(long = "budget-nodes", value_delimiter = ',', default_value = "20000")]
    pub budget_nodes: Vec<u64>,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub interference: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// A schedule or a simulation trace.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LpArgs {
    pub scenario: String,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub interference: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 5)]
    pub agents: usize,
    /// Fraction of rovers in science zones, e.g. `1/2`.
    #[arg(long, default_value = "1/2")]
    pub science: String,
    #[arg(long, default_value_t = 3)]
    pub samples: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn execute(cmd: Command) -> i32 {
    let r = match cmd {
        Command::Solve(a) => cmd_solve(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Render(a) => cmd_render(&a),
        Command::Lp(a) => cmd_lp(&a),
        Command::Generate(a) => cmd_generate(&a),
    };
    match r {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

#[derive(Debug)]
struct Failure(i32, String);

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, msg.to_string())
}

/// Reads a scenario file, or a built-in one named `canned:NAME`.
pub fn load_scenario(arg: &str) -> Result<ScenarioFile, String> {
    if let Some(name) = arg.strip_prefix("canned:") {
        return canned_scenario(name).map_err(|e| e.to_string());
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
    parse_scenario(&text).map_err(|e| format!("{arg}: {e}"))
}

/// `None` keeps the scenario's objective. A bare `weighted` reuses the
/// scenario weights when it has them.
pub fn resolve_objective(over: Option<&str>, current: &Objective) -> Result<Objective, String> {
    match over.map(str::trim) {
        None => Ok(current.clone()),
        Some("weighted") => match current {
            Objective::Weighted(_) => Ok(current.clone()),
            _ => Err("`weighted` needs weights, e.g. `weighted reward=1 energy=1/10`".into()),
        },
        Some(s) => parse_objective(s).ok_or_else(|| format!("unknown objective `{s}`")),
    }
}

/// Which selfish reference matches an objective.
pub fn selfish_mode_for(o: &Objective) -> SelfishMode {
    let rewards = o
        .components()
        .iter()
        .any(|(b, w)| *b == BaseObjective::OptionalReward && *w > Q::from_integer(0));
    if rewards {
        SelfishMode::StorageExcepted
    } else {
        SelfishMode::Strict
    }
}

fn problem_of(s: &ScenarioFile, objective: Option<&str>) -> Result<ProblemInstance, Failure> {
    let p = s.to_problem().map_err(input)?;
    let o = resolve_objective(objective, &p.objective).map_err(input)?;
    let p = p.with_objective(o);
    let report = validate_problem(&p);
    if !report.is_admissible() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(input(msgs.join("; ")));
    }
    Ok(p)
}

/// Solves `p` seeded with the matching selfish schedule, so a budgeted run
/// never returns anything worse than the selfish allocation.
pub fn solve_against_selfish(
    p: &ProblemInstance,
    interference: bool,
    budget: &SolveBudget,
) -> Result<(SolveResult, Option<Schedule>), EncodeError> {
    let inst = encode(p, interference)?;
    let selfish = selfish_schedule(p, selfish_mode_for(&p.objective)).ok();
    let r = match selfish.as_ref().map(|s| solve(&inst, Some(s), budget)) {
        Some(Ok(r)) => r,
        _ => solve(&inst, None, budget).expect("unseeded solve cannot fail"),
    };
    Ok((r, selfish))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure(EXIT_OUTPUT, format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<i32, Failure> {
    let s = load_scenario(&a.scenario).map_err(input)?;
    let p = problem_of(&s, a.objective.as_deref())?;
    let budget = SolveBudget::nodes(a.budget_nodes);
    let r = match solve_against_selfish(&p, a.interference, &budget) {
        Ok((r, _)) => r,
        Err(EncodeError::InfeasibleHorizon(t)) => {
            return Err(Failure(
                EXIT_INFEASIBLE,
                format!("required task `{t}` fits nowhere"),
            ))
        }
        Err(e) => return Err(input(e)),
    };
    let text = write_schedule(&p, &r);
    if a.out.is_some() {
        write_out(a.out.as_deref(), &text)?;
        println!("{r}");
    } else {
        write_out(None, &text)?;
    }
    let code = match (r.status, &r.incumbent) {
        (SolveStatus::Optimal | SolveStatus::BudgetExhausted, Some(_)) => EXIT_OK,
        _ => {
            eprintln!("error: no feasible schedule found");
            EXIT_INFEASIBLE
        }
    };
    Ok(code)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32, Failure> {
    let s = load_scenario(&a.scenario).map_err(input)?;
    problem_of(&s, None)?;
    let trace = run_cycles(&s, a.cycles, a.interference);
    let mut digests = String::from("cycle,agent,digest\n");
    for c in &trace.cycles {
        for plan in &c.plans {
            let _ = writeln!(digests, "{},{},{}", c.cycle, plan.agent, plan.digest);
        }
    }
    let text = trace.to_text();
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| Failure(EXIT_OUTPUT, format!("{}: {e}", dir.display())))?;
            write_out(Some(&dir.join("trace.txt")), &text)?;
            write_out(Some(&dir.join("digests.csv")), &digests)?;
        }
        None => print!("{text}"),
    }
    for c in &trace.cycles {
        let executed = c
            .executed
            .iter()
            .filter(|t| !crate::distsim::is_hold(&t.task))
            .count();
        eprintln!(
            "cycle {} consensus {} plans {} executed {} missed {} carried {}",
            c.cycle,
            if c.consensus() { "complete" } else { "partial" },
            c.plans.len(),
            executed,
            c.missed.len(),
            c.carried.len()
        );
    }
    if trace.agreement_ok() {
        Ok(EXIT_OK)
    } else {
        for c in trace.cycles.iter().filter(|c| !c.disagreements.is_empty()) {
            eprintln!("cycle {}: plans differ {:?}", c.cycle, c.disagreements);
        }
        Ok(EXIT_AGREEMENT)
    }
}

fn expand(patterns: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for pat in patterns {
        if pat.starts_with("canned:") {
            out.push(pat.clone());
            continue;
        }
        let mut hits: Vec<String> = match glob::glob(pat) {
            Ok(paths) => paths
                .filter_map(Result::ok)
                .map(|p| p.display().to_string())
                .collect(),
            Err(_) => Vec::new(),
        };
        hits.sort();
        if hits.is_empty() {
            out.push(pat.clone());
        }
        out.extend(hits);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row, without the trailing newline.
pub fn benchmark_row(
    scenario: &str,
    budget: u64,
    objective: Option<&str>,
    interference: bool,
) -> String {
    let started = Instant::now();
    let label = objective.unwrap_or("scenario");
    let fail = |msg: String| {
        let mut cols = vec![csv_field(scenario), budget.to_string(), csv_field(label)];
        cols.extend(std::iter::repeat(String::new()).take(16));
        cols.push(csv_field(&msg));
        cols.join(",")
    };
    let s = match load_scenario(scenario) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let p = match problem_of(&s, objective) {
        Ok(p) => p,
        Err(Failure(_, m)) => return fail(m),
    };
    let (r, selfish) = match solve_against_selfish(&p, interference, &SolveBudget::nodes(budget)) {
        Ok(x) => x,
        Err(e) => return fail(e.to_string()),
    };
    let (Some(shared), Some(selfish)) = (r.incumbent.as_ref(), selfish.as_ref()) else {
        return fail("no schedule".into());
    };
    let m = compare(&p, shared, selfish);
    let avg = |v: Option<Q>| v.map(|x| format_q(&x)).unwrap_or_default();
    [
        csv_field(&s.name),
        budget.to_string(),
        csv_field(&crate::scenarios::objective_text(&p.objective)),
        r.status.as_str().to_string(),
        format_q(&m.shared.value),
        format_q(&m.selfish.value),
        m.shared.collected.to_string(),
        m.selfish.collected.to_string(),
        m.shared.analyzed.to_string(),
        m.selfish.analyzed.to_string(),
        m.shared.stored.to_string(),
        m.selfish.stored.to_string(),
        avg(m.shared.average_energy()),
        avg(m.selfish.average_energy()),
        m.shared.makespan.to_string(),
        m.selfish.makespan.to_string(),
        format_q(&m.shared.bits),
        r.nodes_explored.to_string(),
        started.elapsed().as_millis().to_string(),
        String::new(),
    ]
    .join(",")
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<i32, Failure> {
    let mut csv = format!("{BENCHMARK_HEADER}\n");
    for path in expand(&a.scenarios) {
        for &b in &a.budget_nodes {
            csv += &benchmark_row(&path, b, a.objective.as_deref(), a.interference);
            csv.push('\n');
        }
    }
    write_out(a.out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

fn cmd_render(a: &RenderArgs) -> Result<i32, Failure> {
    let text =
        fs::read_to_string(&a.input).map_err(|e| input(format!("{}: {e}", a.input.display())))?;
    let title = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let g = if text.trim_start().starts_with("commsched-trace") {
        gantt_from_trace(&text).map_err(input)?
    } else {
        Gantt::from_schedule(&title, &parse_schedule(&text).map_err(input)?)
    };
    write_out(a.out.as_deref(), &render_svg(&g))?;
    Ok(EXIT_OK)
}

fn cmd_lp(a: &LpArgs) -> Result<i32, Failure> {
    let s = load_scenario(&a.scenario).map_err(input)?;
    let p = problem_of(&s, a.objective.as_deref())?;
    let inst = match encode(&p, a.interference) {
        Ok(i) => i,
        Err(EncodeError::InfeasibleHorizon(t)) => {
            return Err(Failure(
                EXIT_INFEASIBLE,
                format!("required task `{t}` fits nowhere"),
            ))
        }
        Err(e) => return Err(input(e)),
    };
    write_out(a.out.as_deref(), &export_lp(&inst))?;
    Ok(EXIT_OK)
}

fn cmd_generate(a: &GenerateArgs) -> Result<i32, Failure> {
    if !(2..=50).contains(&a.agents) {
        return Err(input("--agents must be between 2 and 50"));
    }
    let frac = parse_q(&a.science).ok_or_else(|| input(format!("bad fraction `{}`", a.science)))?;
    let s = generate_random(a.agents, frac, a.samples, a.seed);
    write_out(a.out.as_deref(), &s.to_text())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_overrides() {
        let w = parse_objective("weighted reward=1 energy=1/10").unwrap();
        assert_eq!(resolve_objective(None, &w).unwrap(), w);
        assert_eq!(resolve_objective(Some("weighted"), &w).unwrap(), w);
        assert!(resolve_objective(Some("weighted"), &Objective::Energy).is_err());
        assert_eq!(
            resolve_objective(Some("makespan"), &w).unwrap(),
            Objective::Makespan
        );
        assert!(resolve_objective(Some("quickest"), &w).is_err());
        assert_eq!(
            selfish_mode_for(&Objective::OptionalReward),
            SelfishMode::StorageExcepted
        );
        assert_eq!(selfish_mode_for(&w), SelfishMode::StorageExcepted);
        assert_eq!(selfish_mode_for(&Objective::Energy), SelfishMode::Strict);
    }

    #[test]
    fn csv_rows_have_every_column() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        let cols = BENCHMARK_HEADER.split(',').count();
        let ok = benchmark_row("canned:relay", 100, None, false);
        assert_eq!(ok.split(',').count(), cols);
        assert!(ok.starts_with("relay,100,reward,Optimal,25,"));
        let bad = benchmark_row("canned:nowhere", 100, None, false);
        assert_eq!(bad.split(',').count(), cols);
        assert!(bad.ends_with("unknown scenario `nowhere`"));
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from([
            "commsched",
            "benchmark",
            "a*",
            "--budget-nodes",
            "10,20",
            "--interference",
        ])
        .unwrap();
        let Command::Benchmark(b) = cli.command else {
            panic!()
        };
        assert_eq!(b.budget_nodes, vec![10, 20]);
        assert!(b.interference);
        assert_eq!(run(["commsched", "solve"]), EXIT_INPUT);
        assert_eq!(run(["commsched", "solve", "canned:none"]), EXIT_INPUT);
    }
}
