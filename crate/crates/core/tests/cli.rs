use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use commsched::cli::BENCHMARK_HEADER;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commsched"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SINGLE: &str = "\
commsched-scenario 1
name single
horizon 3 3
AGENTS
a
END
TASKS
t required
END
COSTS
a t 1 1
END
";

const LOOP: &str = "\
commsched-scenario 1
name loop
horizon 3 3
AGENTS
a
END
TASKS
x required after=y
y required after=x
END
COSTS
a x 1 1
a y 1 1
END
";

const OUTAGE: &str = "\
commsched-scenario 1
name outage
horizon 6 6
AGENTS
a
b base
END
TASKS
t1 required size=1 owner=a
t2 required after=t1 owner=a
END
COSTS
a t1 1 1
a t2 2 2
END
CONTACTS
a <-> b 1
END
CONFIG
execute 6
budget 500
END
SCRIPT
1 disable a
5 enable a
END
";

#[test]
fn solve_single_agent() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("single.txt");
    let out = dir.path().join("single.sched");
    fs::write(&scen, SINGLE).unwrap();
    let o = run(&["solve", path(&scen), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("place ")).count(), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("status Optimal"));
}

#[test]
fn solve_relay_has_two_hops() {
    let o = run(&["solve", "canned:relay"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("comm a r sample"), "{text}");
    assert!(text.contains("comm r b sample"), "{text}");
}

#[test]
fn solve_rejects_cycles_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("loop.txt");
    fs::write(&scen, LOOP).unwrap();
    let o = run(&["solve", path(&scen)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycl"));
    assert_eq!(
        run(&["solve", "canned:relay", "--objective", "fastest"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["solve", "missing.txt"]).status.code(), Some(2));
}

#[test]
fn solve_rejects_overlong_task() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("long.txt");
    fs::write(&scen, SINGLE.replace("a t 1 1", "a t 9 1")).unwrap();
    let o = run(&["solve", path(&scen)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon"));
}

#[test]
fn simulate_static_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        "canned:science_cluster",
        "--cycles",
        "2",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("digests.csv")).unwrap();
    for cycle in ["0", "1"] {
        let d: Vec<&str> = csv
            .lines()
            .skip(1)
            .filter(|l| l.starts_with(&format!("{cycle},")))
            .map(|l| l.rsplit(',').next().unwrap())
            .collect();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|x| *x == d[0]));
    }
    assert!(dir.path().join("trace.txt").exists());
}

#[test]
fn simulate_mule_stores_then_forwards() {
    let o = run(&["simulate", "canned:data_mule", "--cycles", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let window = |prefix: &str| -> (u32, u32) {
        let l = text
            .lines()
            .find(|l| l.starts_with(prefix))
            .unwrap_or_else(|| panic!("{prefix}\n{text}"));
        let w: Vec<&str> = l.split_whitespace().collect();
        (w[6].parse().unwrap(), w[7].parse().unwrap())
    };
    let (_, to_mule_end) = window("0 execute r send c0.sample m");
    let (from_mule_start, _) = window("0 execute m send c0.sample b");
    assert!(to_mule_end <= from_mule_start);
}

#[test]
fn simulate_outage_carries_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("outage.txt");
    fs::write(&scen, OUTAGE).unwrap();
    let o = run(&["simulate", path(&scen), "--cycles", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0 execute a miss c0.t2 agent-disabled"));
    let pool = text
        .lines()
        .find(|l| l.starts_with("1 snapshot - pool"))
        .unwrap();
    assert!(pool.contains("c0.t2"), "{pool}");
    assert!(text.contains("1 execute a run c0.t2"));
}

#[test]
fn benchmark_rows() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let f = dir.path().join(format!("g{seed}.txt"));
        let o = run(&[
            "generate",
            "--agents",
            "4",
            "--science",
            "0",
            "--seed",
            &seed.to_string(),
            "--out",
            path(&f),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = dir.path().join("b.csv");
    let pattern = format!("{}/g*.txt", path(dir.path()));
    let o = run(&[
        "benchmark",
        &pattern,
        "missing.txt",
        "--budget-nodes",
        "200",
        "--out",
        path(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(BENCHMARK_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows[..3] {
        assert_eq!(r.len(), 20);
        assert_eq!(r[19], "");
        assert_eq!(r[4], r[5]);
        assert_eq!(r[6], r[7]);
    }
    assert!(!rows[3][19].is_empty());
}

#[test]
fn benchmark_threefold() {
    let o = run(&["benchmark", "canned:science_cluster"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[3], row[6], row[7]), ("Optimal", "3", "1"));
}

#[test]
fn render_schedule_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("al.sched");
    assert_eq!(
        run(&["solve", "canned:assembly_line", "--out", path(&sched)])
            .status
            .code(),
        Some(0)
    );
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    assert_eq!(
        run(&["render", path(&sched), "--out", path(&a)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["render", path(&sched), "--out", path(&b)])
            .status
            .code(),
        Some(0)
    );
    let svg = fs::read(&a).unwrap();
    assert_eq!(svg, fs::read(&b).unwrap());
    assert!(String::from_utf8(svg)
        .unwrap()
        .contains(r#"data-agent="r2" data-task="analyze""#));

    let empty = dir.path().join("empty.sched");
    fs::write(
        &empty,
        "commsched-schedule 1\nagents a b\nsteps 3\nmakespan 0\n",
    )
    .unwrap();
    let o = run(&["render", path(&empty)]);
    let svg = String::from_utf8(o.stdout).unwrap();
    assert_eq!(svg.matches(r#"class="row""#).count(), 2);
    assert!(!svg.contains(r#"class="task""#));

    let sim = dir.path().join("sim");
    run(&[
        "simulate",
        "canned:relay",
        "--cycles",
        "2",
        "--out",
        path(&sim),
    ]);
    let o = run(&["render", path(&sim.join("trace.txt"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains(r#"class="cycle""#));

    let bad = dir.path().join("bad.sched");
    fs::write(&bad, "garbage\n").unwrap();
    assert_eq!(run(&["render", path(&bad)]).status.code(), Some(2));
}

#[test]
fn lp_export_is_deterministic() {
    let a = run(&["lp", "canned:relay"]);
    let b = run(&["lp", "canned:relay"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains("Subject To"));
}
