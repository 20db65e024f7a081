//! Gantt-style SVG timelines for schedules and simulation traces.

use std::fmt::Write as _;

use crate::scenarios::{ParsedSchedule, ScenarioError};

const LABEL_W: u32 = 90;
const STEP_W: u32 = 36;
const ROW_H: u32 = 32;
const TOP: u32 = 40;
const CYCLE_GAP: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub agent: String,
    pub label: String,
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub src: String,
    pub dst: String,
    pub label: String,
    pub start: u32,
    pub end: u32,
}

/// Everything drawn on one chart, in step units.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gantt {
    pub title: String,
    pub agents: Vec<String>,
    pub steps: u32,
    pub blocks: Vec<Block>,
    pub arrows: Vec<Arrow>,
    /// Steps at which a dashed cycle boundary is drawn.
    pub separators: Vec<u32>,
}

impl Gantt {
    /// Blocks last one step when the schedule does not record an end.
    pub fn from_schedule(title: &str, parsed: &ParsedSchedule) -> Self {
        let s = &parsed.schedule;
        let blocks: Vec<Block> = s
            .placements
            .iter()
            .enumerate()
            .map(|(i, p)| Block {
                agent: p.agent.clone(),
                label: p.task.clone(),
                start: p.start,
                end: parsed.ends.get(i).copied().flatten().unwrap_or(p.start + 1),
            })
            .collect();
        let arrows: Vec<Arrow> = s
            .comms
            .iter()
            .map(|c| Arrow {
                src: c.src.clone(),
                dst: c.dst.clone(),
                label: c.task.clone(),
                start: c.start,
                end: c.end,
            })
            .collect();
        let last = blocks
            .iter()
            .map(|b| b.end)
            .chain(arrows.iter().map(|a| a.end))
            .max()
            .unwrap_or(0);
        Gantt {
            title: title.to_string(),
            agents: parsed.agents.clone(),
            steps: parsed.steps.unwrap_or(0).max(last).max(s.makespan_steps),
            blocks,
            arrows,
            separators: Vec::new(),
        }
    }

    fn row(&self, agent: &str) -> Option<u32> {
        self.agents
            .iter()
            .position(|a| a == agent)
            .map(|r| r as u32)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Deterministic SVG text for the chart.
pub fn render_svg(g: &Gantt) -> String {
    let width = LABEL_W + STEP_W * g.steps.max(1) + 20;
    let height = TOP + ROW_H * g.agents.len().max(1) as u32 + 30;
    let x = |k: u32| LABEL_W + STEP_W * k;
    let y = |r: u32| TOP + ROW_H * r;
    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">"#
    );
    o.push_str(
        "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\">\
         <path d=\"M0,0 L8,4 L0,8 z\" fill=\"#c0392b\"/></marker></defs>\n",
    );
    let _ = writeln!(
        o,
        r#"<text class="title" x="8" y="20" font-size="14">{}</text>"#,
        esc(&g.title)
    );
    for (r, a) in g.agents.iter().enumerate() {
        let r = r as u32;
        let _ = writeln!(
            o,
            r##"<rect class="row" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"##,
            LABEL_W,
            y(r),
            STEP_W * g.steps.max(1),
            ROW_H,
            if r % 2 == 0 { "#f4f4f4" } else { "#e8e8e8" }
        );
        let _ = writeln!(
            o,
            r#"<text class="agent" x="8" y="{}">{}</text>"#,
            y(r) + ROW_H / 2 + 4,
            esc(a)
        );
    }
    let axis = y(g.agents.len() as u32) + 14;
    for k in 0..=g.steps {
        let _ = writeln!(
            o,
            r#"<text class="tick" x="{}" y="{axis}" text-anchor="middle">{k}</text>"#,
            x(k)
        );
    }
    for &s in &g.separators {
        let _ = writeln!(
            o,
            r##"<line class="cycle" x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#555" stroke-dasharray="4,3"/>"##,
            x(s),
            TOP - 6,
            y(g.agents.len() as u32)
        );
    }
    for b in &g.blocks {
        let Some(r) = g.row(&b.agent) else { continue };
        let w = STEP_W * b.end.saturating_sub(b.start).max(1);
        let _ = writeln!(
            o,
            r##"<g class="task" data-agent="{}" data-task="{}"><rect x="{}" y="{}" width="{}" height="{}" rx="3" fill="#5b8fd6" stroke="#2c4f80"/><text x="{}" y="{}" fill="#fff">{}</text></g>"##,
            esc(&b.agent),
            esc(&b.label),
            x(b.start) + 1,
            y(r) + 4,
            w - 2,
            ROW_H - 8,
            x(b.start) + 4,
            y(r) + ROW_H / 2 + 4,
            esc(&b.label)
        );
    }
    for a in &g.arrows {
        let (Some(rs), Some(rd)) = (g.row(&a.src), g.row(&a.dst)) else {
            continue;
        };
        let _ = writeln!(
            o,
            r##"<g class="comm" data-src="{}" data-dst="{}" data-task="{}"><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-width="1.5" marker-end="url(#head)"/><text x="{}" y="{}" fill="#c0392b" font-size="9">{}</text></g>"##,
            esc(&a.src),
            esc(&a.dst),
            esc(&a.label),
            x(a.start),
            y(rs) + ROW_H / 2,
            x(a.end),
            y(rd) + ROW_H / 2,
            x(a.start) + 2,
            (y(rs) + y(rd)) / 2 + ROW_H / 2 - 2,
            esc(&a.label)
        );
    }
    o.push_str("</svg>\n");
    o
}

fn perr(line: usize, msg: &str) -> ScenarioError {
    ScenarioError::Parse {
        line,
        msg: msg.to_string(),
    }
}

/// Reads a `commsched-trace 1` file into a chart of executed work, with
/// cycles laid side by side.
pub fn gantt_from_trace(text: &str) -> Result<Gantt, ScenarioError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "commsched-trace 1")) => {}
        _ => return Err(perr(1, "expected `commsched-trace 1`")),
    }
    let mut g = Gantt::default();
    let mut steps = 0u32;
    let mut last_cycle = 0u32;
    let seen = |g: &mut Gantt, a: &str| {
        if a != "-" && !g.agents.iter().any(|x| x == a) {
            g.agents.push(a.to_string());
        }
    };
    for (n, l) in lines {
        let w: Vec<&str> = l.split_whitespace().collect();
        if w.is_empty() {
            continue;
        }
        if w[0] == "scenario" {
            match w.as_slice() {
                ["scenario", name, "steps", s, "dt", _] => {
                    g.title = name.to_string();
                    steps = s.parse().map_err(|_| perr(n, "bad step count"))?;
                }
                _ => return Err(perr(n, "bad scenario line")),
            }
            continue;
        }
        if w.len() < 4 {
            return Err(perr(n, "expected `cycle phase agent event ...`"));
        }
        let cycle: u32 = w[0].parse().map_err(|_| perr(n, "bad cycle number"))?;
        last_cycle = last_cycle.max(cycle);
        let off = cycle * (steps + CYCLE_GAP);
        let num = |s: &str| s.parse::<u32>().map_err(|_| perr(n, "bad step"));
        match (w[1], w[3]) {
            ("broadcast", "view") => {
                seen(&mut g, w[2]);
                for a in w
                    .get(4)
                    .map(|v| v.split(',').collect())
                    .unwrap_or_else(Vec::new)
                {
                    seen(&mut g, a);
                }
            }
            ("execute", "run") if w.len() == 7 => {
                seen(&mut g, w[2]);
                g.blocks.push(Block {
                    agent: w[2].into(),
                    label: w[4].into(),
                    start: off + num(w[5])?,
                    end: off + num(w[6])?,
                });
            }
            ("execute", "send") if w.len() == 8 => {
                seen(&mut g, w[2]);
                seen(&mut g, w[5]);
                g.arrows.push(Arrow {
                    src: w[2].into(),
                    dst: w[5].into(),
                    label: w[4].into(),
                    start: off + num(w[6])?,
                    end: off + num(w[7])?,
                });
            }
            _ => {}
        }
    }
    g.steps = (last_cycle + 1) * (steps + CYCLE_GAP) - CYCLE_GAP;
    g.separators = (1..=last_cycle)
        .map(|c| c * (steps + CYCLE_GAP) - 1)
        .collect();
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::parse_schedule;

    #[test]
    fn empty_schedule_has_rows_only() {
        let p = parse_schedule("commsched-schedule 1\nagents a b\nsteps 4\nmakespan 0\n").unwrap();
        let svg = render_svg(&Gantt::from_schedule("empty", &p));
        assert_eq!(svg.matches("class=\"row\"").count(), 2);
        assert!(!svg.contains("class=\"task\""));
        assert_eq!(svg, render_svg(&Gantt::from_schedule("empty", &p)));
    }

    #[test]
    fn blocks_and_arrows_are_drawn() {
        let p = parse_schedule(
            "commsched-schedule 1\nagents a b\nmakespan 3\nplace a t1 0 1\nplace b t2 2 3\ncomm a b t1 1 2 1\n",
        )
        .unwrap();
        let svg = render_svg(&Gantt::from_schedule("x", &p));
        assert!(svg.contains(r#"data-agent="b" data-task="t2""#));
        assert!(svg.contains(r#"data-src="a" data-dst="b" data-task="t1""#));
    }

    #[test]
    fn trace_cycles_are_offset() {
        let text = "commsched-trace 1\nscenario s steps 4 dt 1\n0 broadcast a view a,b\n\
                    0 execute a run c0.t 0 2\n1 execute b run c1.t 1 2\n1 execute b send c1.t a 2 3\n";
        let g = gantt_from_trace(text).unwrap();
        assert_eq!(g.agents, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(g.blocks[1].start, 7);
        assert_eq!(g.separators, vec![5]);
        assert!(gantt_from_trace("nope").is_err());
    }
}
