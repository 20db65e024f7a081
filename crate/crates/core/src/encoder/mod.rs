//! Time-indexed 0/1 linear program for a [`ProblemInstance`].
//!
//! Steps are 0-based. A task started at step `k` with a duration of `c` steps
//! occupies steps `k..k+max(c,1)` and its data product is available to the
//! executing agent from step `k+max(c,1)`. A transfer during step `k` credits
//! `rate * step_duration / size` of the product to the receiver, which may
//! hold it from step `k+1` once the credited fractions reach one. Products of
//! size zero become available to every agent on completion.
//!
//! Column order is step-major: for each step `k`, all `D(.,.,k)`, then all
//! `X(.,.,k)`, then all `C(.,.,.,k)`. Continuous `R` columns (interference
//! mode) and the makespan column `Z` come last.

mod lp;

pub use lp::export_lp;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{BaseObjective, CommEvent, Objective, Placement, ProblemInstance, Schedule};
use crate::rational::{format_q, q, qf, Q};
use crate::verify::occupancy;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("required task `{0}` fits on no agent within the horizon")]
    InfeasibleHorizon(String),
    #[error("assignment is infeasible: {0}")]
    InfeasibleAssignment(String),
    #[error("schedule cannot be expressed in this encoding: {0}")]
    Unrepresentable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Q,
    pub upper: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Required,
    Optional,
    Prerequisite,
    Resource,
    Learning,
    Knowledge,
    Initial,
    Bandwidth,
    Capacity,
    Makespan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub kind: RowKind,
    pub terms: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn activity(&self, values: &[Q]) -> Q {
        self.terms.iter().map(|(c, a)| *a * values[*c]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[Q]) -> Q {
        let act = self.activity(values);
        let zero = Q::zero();
        match self.relation {
            Relation::Le => (act - self.rhs).max(zero),
            Relation::Ge => (self.rhs - act).max(zero),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// What a column stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    /// Agent starts task at step.
    X {
        agent: usize,
        task: usize,
        step: u32,
    },
    /// Agent holds the task's data product at step.
    D {
        agent: usize,
        task: usize,
        step: u32,
    },
    /// Agent `src` transmits (part of) the product to `dst` during step.
    C {
        src: usize,
        dst: usize,
        task: usize,
        step: u32,
    },
    /// Bits of the product sent `src -> dst` during step (interference mode).
    R {
        src: usize,
        dst: usize,
        task: usize,
        step: u32,
    },
    /// Makespan.
    Z,
}

/// Bijections between model indices and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMaps {
    pub agents: usize,
    pub tasks: usize,
    pub steps: u32,
    x: Vec<Option<usize>>,
    d: Vec<usize>,
    c: Vec<usize>,
    r: Vec<Option<usize>>,
    pub z: Option<usize>,
    roles: Vec<Column>,
}

impl IndexMaps {
    fn xi(&self, i: usize, t: usize, k: u32) -> usize {
        (i * self.tasks + t) * self.steps as usize + k as usize
    }

    fn ci(&self, i: usize, j: usize, t: usize, k: u32) -> usize {
        ((i * self.agents + j) * self.tasks + t) * self.steps as usize + k as usize
    }

    pub fn x(&self, i: usize, t: usize, k: u32) -> Option<usize> {
        self.x[self.xi(i, t, k)]
    }

    pub fn d(&self, i: usize, t: usize, k: u32) -> usize {
        self.d[self.xi(i, t, k)]
    }

    pub fn c(&self, i: usize, j: usize, t: usize, k: u32) -> usize {
        self.c[self.ci(i, j, t, k)]
    }

    pub fn r(&self, i: usize, j: usize, t: usize, k: u32) -> Option<usize> {
        if self.r.is_empty() {
            None
        } else {
            self.r[self.ci(i, j, t, k)]
        }
    }

    pub fn role(&self, col: usize) -> Column {
        self.roles[col]
    }

    pub fn roles(&self) -> &[Column] {
        &self.roles
    }
}

/// A linear program over binary and continuous columns, maximized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpInstance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective, sorted by column.
    pub objective: Vec<(usize, Q)>,
    pub maps: IndexMaps,
    pub interference: bool,
    /// Duration in steps per (agent, task); `None` when forbidden.
    pub durations: Vec<Option<u32>>,
    /// The instance this program was built from.
    pub problem: ProblemInstance,
    base_rows: usize,
    base_cols: usize,
}

impl IlpInstance {
    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn num_columns(&self) -> usize {
        self.variables.len()
    }

    pub fn duration(&self, agent: usize, task: usize) -> Option<u32> {
        self.durations[agent * self.maps.tasks + task]
    }

    /// True when an `X(agent, task, step)` column can take value one.
    pub fn x_usable(&self, agent: usize, task: usize, step: u32) -> bool {
        match (self.maps.x(agent, task, step), self.duration(agent, task)) {
            (Some(col), Some(_)) => self.variables[col].upper.is_one(),
            _ => false,
        }
    }

    pub fn objective_value(&self, values: &[Q]) -> Q {
        self.objective.iter().map(|(c, a)| *a * values[*c]).sum()
    }

    /// Checks bounds, integrality and every row within `1e-6`.
    pub fn check(&self, values: &[Q]) -> Result<(), EncodeError> {
        if values.len() != self.variables.len() {
            return Err(EncodeError::InfeasibleAssignment(format!(
                "expected {} values, got {}",
                self.variables.len(),
                values.len()
            )));
        }
        let tol = qf(1, 1_000_000);
        for (v, val) in self.variables.iter().zip(values) {
            if v.kind == VarKind::Binary && !(val.is_zero() || val.is_one()) {
                return Err(EncodeError::InfeasibleAssignment(format!(
                    "{} = {} is not binary",
                    v.name,
                    format_q(val)
                )));
            }
            if *val < v.lower - tol || *val > v.upper + tol {
                return Err(EncodeError::InfeasibleAssignment(format!(
                    "{} = {} out of bounds",
                    v.name,
                    format_q(val)
                )));
            }
        }
        for row in &self.constraints {
            if row.violation(values) > tol {
                return Err(EncodeError::InfeasibleAssignment(format!(
                    "row {} violated",
                    row.name
                )));
            }
        }
        Ok(())
    }

    /// Row counts by kind, for reporting.
    pub fn row_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for r in &self.constraints {
            let k = match r.kind {
                RowKind::Required => "required",
                RowKind::Optional => "optional",
                RowKind::Prerequisite => "prerequisite",
                RowKind::Resource => "resource",
                RowKind::Learning => "learning",
                RowKind::Knowledge => "knowledge",
                RowKind::Initial => "initial",
                RowKind::Bandwidth => "bandwidth",
                RowKind::Capacity => "capacity",
                RowKind::Makespan => "makespan",
            };
            *out.entry(k).or_insert(0) += 1;
        }
        out
    }
}

impl fmt::Display for IlpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} columns ({} binary), {} rows",
            self.variables.len(),
            self.num_binaries(),
            self.constraints.len()
        )
    }
}

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: Q, upper: Q) -> usize {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    fn row(
        &mut self,
        name: String,
        kind: RowKind,
        mut terms: Vec<(usize, Q)>,
        relation: Relation,
        rhs: Q,
    ) {
        terms.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, Q)> = Vec::with_capacity(terms.len());
        for (c, a) in terms {
            match merged.last_mut() {
                Some((lc, la)) if *lc == c => *la += a,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.constraints.push(Constraint {
            name,
            kind,
            terms: merged,
            relation,
            rhs,
        });
    }
}

/// Builds the integer program and installs the instance's objective.
pub fn encode(p: &ProblemInstance, interference: bool) -> Result<IlpInstance, EncodeError> {
    let n = p.num_agents();
    let m = p.num_tasks();
    let h = p.steps();
    let dt = p.horizon.step_duration();
    let one = Q::one();
    let mut durations = vec![None; n * m];
    for i in 0..n {
        for t in 0..m {
            durations[i * m + t] = p.duration_steps(i, t);
        }
    }
    let usable = |i: usize, t: usize, k: u32| durations[i * m + t].is_some_and(|c| k + c <= h);

    let mut b = Builder {
        variables: Vec::new(),
        constraints: Vec::new(),
    };
    let cells = n * m * h as usize;
    let mut maps = IndexMaps {
        agents: n,
        tasks: m,
        steps: h,
        x: vec![None; cells],
        d: vec![usize::MAX; cells],
        c: vec![usize::MAX; n * n * m * h as usize],
        r: if interference {
            vec![None; n * n * m * h as usize]
        } else {
            Vec::new()
        },
        z: None,
        roles: Vec::new(),
    };
    let zero = Q::zero();
    for k in 0..h {
        for i in 0..n {
            for t in 0..m {
                let col = b.var(format!("D_{i}_{t}_{k}"), VarKind::Binary, zero, one);
                let idx = maps.xi(i, t, k);
                maps.d[idx] = col;
                maps.roles.push(Column::D {
                    agent: i,
                    task: t,
                    step: k,
                });
            }
        }
        for i in 0..n {
            for t in 0..m {
                if durations[i * m + t].is_none() {
                    continue;
                }
                let ub = if usable(i, t, k) { one } else { zero };
                let col = b.var(format!("X_{i}_{t}_{k}"), VarKind::Binary, zero, ub);
                let idx = maps.xi(i, t, k);
                maps.x[idx] = Some(col);
                maps.roles.push(Column::X {
                    agent: i,
                    task: t,
                    step: k,
                });
            }
        }
        for i in 0..n {
            for j in 0..n {
                for t in 0..m {
                    let ub = if i == j { zero } else { one };
                    let col = b.var(format!("C_{i}_{j}_{t}_{k}"), VarKind::Binary, zero, ub);
                    let idx = maps.ci(i, j, t, k);
                    maps.c[idx] = col;
                    maps.roles.push(Column::C {
                        src: i,
                        dst: j,
                        task: t,
                        step: k,
                    });
                }
            }
        }
    }
    if interference {
        for k in 0..h {
            for i in 0..n {
                for j in 0..n {
                    for t in 0..m {
                        let ub = if i == j {
                            zero
                        } else {
                            p.bits_per_step(i, j, k)
                        };
                        let col =
                            b.var(format!("R_{i}_{j}_{t}_{k}"), VarKind::Continuous, zero, ub);
                        let idx = maps.ci(i, j, t, k);
                        maps.r[idx] = Some(col);
                        maps.roles.push(Column::R {
                            src: i,
                            dst: j,
                            task: t,
                            step: k,
                        });
                    }
                }
            }
        }
    }

    // each required task exactly once, each optional task at most once
    for t in 0..m {
        let task = p.task(t);
        let mut terms = Vec::new();
        for i in 0..n {
            for k in 0..h {
                if usable(i, t, k) {
                    terms.push((maps.x(i, t, k).expect("usable"), one));
                }
            }
        }
        if task.required {
            if terms.is_empty() {
                return Err(EncodeError::InfeasibleHorizon(task.id.clone()));
            }
            b.row(
                format!("required_{t}"),
                RowKind::Required,
                terms,
                Relation::Eq,
                one,
            );
        } else {
            b.row(
                format!("optional_{t}"),
                RowKind::Optional,
                terms,
                Relation::Le,
                one,
            );
        }
    }

    // start only with every predecessor's product at hand
    for i in 0..n {
        for t in 0..m {
            let preds = p.network.pred_indices(t);
            for k in 0..h {
                if !usable(i, t, k) {
                    continue;
                }
                let x = maps.x(i, t, k).expect("usable");
                for &l in &preds {
                    b.row(
                        format!("prereq_{i}_{t}_{l}_{k}"),
                        RowKind::Prerequisite,
                        vec![(x, one), (maps.d(i, l, k), -one)],
                        Relation::Le,
                        zero,
                    );
                }
            }
        }
    }

    // one activity per agent per step
    for i in 0..n {
        for k in 0..h {
            let mut terms = Vec::new();
            for t in 0..m {
                for j in 0..n {
                    if j != i {
                        terms.push((maps.c(i, j, t, k), one));
                        terms.push((maps.c(j, i, t, k), one));
                    }
                }
                if let Some(c) = durations[i * m + t] {
                    let occ = occupancy(c);
                    let first = k.saturating_sub(occ - 1);
                    for kh in first..=k {
                        if usable(i, t, kh) {
                            terms.push((maps.x(i, t, kh).expect("usable"), one));
                        }
                    }
                }
            }
            b.row(
                format!("resource_{i}_{k}"),
                RowKind::Resource,
                terms,
                Relation::Le,
                one,
            );
        }
    }

    // learning: D may switch on only after enough bits arrived or local completion
    for i in 0..n {
        for t in 0..m {
            let size = p.task(t).product_size;
            for k in 0..h.saturating_sub(1) {
                let mut terms = vec![(maps.d(i, t, k + 1), one), (maps.d(i, t, k), -one)];
                let completions = |agent: usize, terms: &mut Vec<(usize, Q)>| {
                    if let Some(c) = durations[agent * m + t] {
                        let occ = occupancy(c);
                        for tau in 0..=k {
                            if tau + occ <= k + 1 && usable(agent, t, tau) {
                                terms.push((maps.x(agent, t, tau).expect("usable"), -one));
                            }
                        }
                    }
                };
                if size.is_zero() {
                    for a in 0..n {
                        completions(a, &mut terms);
                    }
                } else {
                    completions(i, &mut terms);
                    for tau in 0..=k {
                        for j in 0..n {
                            if j == i {
                                continue;
                            }
                            if interference {
                                let r = maps.r(j, i, t, tau).expect("interference column");
                                terms.push((r, -(one / size)));
                            } else {
                                let frac = p.bits_per_step(j, i, tau) / size;
                                if !frac.is_zero() {
                                    terms.push((maps.c(j, i, t, tau), -frac));
                                }
                            }
                        }
                    }
                }
                b.row(
                    format!("learn_{i}_{t}_{k}"),
                    RowKind::Learning,
                    terms,
                    Relation::Le,
                    zero,
                );
            }
        }
    }

    // senders must hold what they send
    for k in 0..h {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for t in 0..m {
                    b.row(
                        format!("know_{i}_{j}_{t}_{k}"),
                        RowKind::Knowledge,
                        vec![(maps.c(i, j, t, k), one), (maps.d(i, t, k), -one)],
                        Relation::Le,
                        zero,
                    );
                }
            }
        }
    }

    for i in 0..n {
        for t in 0..m {
            b.row(
                format!("init_{i}_{t}"),
                RowKind::Initial,
                vec![(maps.d(i, t, 0), one)],
                Relation::Eq,
                zero,
            );
        }
    }

    if interference {
        for k in 0..h {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for t in 0..m {
                        b.row(
                            format!("bw_{i}_{j}_{t}_{k}"),
                            RowKind::Bandwidth,
                            vec![
                                (maps.r(i, j, t, k).expect("r"), one),
                                (maps.c(i, j, t, k), -p.bits_per_step(i, j, k)),
                            ],
                            Relation::Le,
                            zero,
                        );
                    }
                }
            }
        }
        for (s, set) in p.contacts.interference.iter().enumerate() {
            for k in 0..h {
                let mut terms = Vec::new();
                for &(i, j) in &set.links {
                    for t in 0..m {
                        terms.push((maps.r(i, j, t, k).expect("r"), one));
                    }
                }
                b.row(
                    format!("cap_{s}_{k}"),
                    RowKind::Capacity,
                    terms,
                    Relation::Le,
                    set.capacity[k as usize] * dt,
                );
            }
        }
    }

    let base_rows = b.constraints.len();
    let base_cols = b.variables.len();
    let inst = IlpInstance {
        variables: b.variables,
        constraints: b.constraints,
        objective: Vec::new(),
        maps,
        interference,
        durations,
        problem: p.clone(),
        base_rows,
        base_cols,
    };
    Ok(encode_objective(p, &p.objective, inst))
}

/// Replaces the objective of `inst` (and any makespan column/rows) with `spec`.
pub fn encode_objective(
    p: &ProblemInstance,
    spec: &Objective,
    mut inst: IlpInstance,
) -> IlpInstance {
    inst.variables.truncate(inst.base_cols);
    inst.constraints.truncate(inst.base_rows);
    inst.maps.roles.truncate(inst.base_cols);
    inst.maps.z = None;
    inst.problem.objective = spec.clone();
    let n = p.num_agents();
    let m = p.num_tasks();
    let h = p.steps();
    let mut obj: BTreeMap<usize, Q> = BTreeMap::new();
    for (component, weight) in spec.components() {
        if weight.is_zero() {
            continue;
        }
        match component {
            BaseObjective::OptionalReward => {
                for t in 0..m {
                    let r = p.task(t).effective_reward();
                    if r.is_zero() {
                        continue;
                    }
                    for i in 0..n {
                        for k in 0..h {
                            if inst.x_usable(i, t, k) {
                                *obj.entry(inst.maps.x(i, t, k).expect("x"))
                                    .or_insert_with(Q::zero) += weight * r;
                            }
                        }
                    }
                }
            }
            BaseObjective::Energy => {
                for i in 0..n {
                    for t in 0..m {
                        let Some(cost) = p.cost(i, t) else { continue };
                        for k in 0..h {
                            if inst.x_usable(i, t, k) && !cost.energy.is_zero() {
                                *obj.entry(inst.maps.x(i, t, k).expect("x"))
                                    .or_insert_with(Q::zero) -= weight * cost.energy;
                            }
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let per_bit = p.contacts.comm_energy(i, j);
                        if i == j || per_bit.is_zero() {
                            continue;
                        }
                        for t in 0..m {
                            for k in 0..h {
                                let e = per_bit * p.bits_per_step(i, j, k);
                                if !e.is_zero() {
                                    *obj.entry(inst.maps.c(i, j, t, k)).or_insert_with(Q::zero) -=
                                        weight * e;
                                }
                            }
                        }
                    }
                }
            }
            BaseObjective::Makespan => {
                let z = match inst.maps.z {
                    Some(z) => z,
                    None => {
                        inst.variables.push(Variable {
                            name: "Z".into(),
                            kind: VarKind::Continuous,
                            lower: Q::zero(),
                            upper: q(h as i128),
                        });
                        let z = inst.variables.len() - 1;
                        inst.maps.z = Some(z);
                        inst.maps.roles.push(Column::Z);
                        let mut rows = Vec::new();
                        for i in 0..n {
                            for t in 0..m {
                                let Some(c) = inst.duration(i, t) else {
                                    continue;
                                };
                                for k in 0..h {
                                    if inst.x_usable(i, t, k) {
                                        let x = inst.maps.x(i, t, k).expect("x");
                                        rows.push(Constraint {
                                            name: format!("mk_{i}_{t}_{k}"),
                                            kind: RowKind::Makespan,
                                            terms: vec![(x, -q((k + c) as i128)), (z, Q::one())],
                                            relation: Relation::Ge,
                                            rhs: Q::zero(),
                                        });
                                    }
                                }
                            }
                        }
                        for r in &mut rows {
                            r.terms.sort_by_key(|(c, _)| *c);
                            r.terms.retain(|(_, a)| !a.is_zero());
                        }
                        inst.constraints.extend(rows);
                        z
                    }
                };
                *obj.entry(z).or_insert_with(Q::zero) -= weight;
            }
        }
    }
    inst.objective = obj.into_iter().filter(|(_, a)| !a.is_zero()).collect();
    inst
}

/// Maximal data-holding pattern for fixed `X`/`C`/`R` values: `D(k+1)` is one
/// exactly when `D(k)` is one or the learning row leaves room for it.
pub fn derive_holdings(inst: &IlpInstance, values: &mut [Q]) {
    let maps = &inst.maps;
    let rows: Vec<&Constraint> = inst
        .constraints
        .iter()
        .filter(|r| r.kind == RowKind::Learning)
        .collect();
    // rows are emitted per (agent, task) in step order, so one pass suffices
    for i in 0..maps.agents {
        for t in 0..maps.tasks {
            values[maps.d(i, t, 0)] = Q::zero();
        }
    }
    for row in rows {
        let mut target = None;
        let mut rest = Q::zero();
        for (c, a) in &row.terms {
            if a.is_one() && target.is_none() && matches!(maps.role(*c), Column::D { .. }) {
                target = Some(*c);
            } else {
                rest += *a * values[*c];
            }
        }
        let target = target.expect("learning row has a D(k+1) term");
        values[target] = if Q::one() + rest <= Q::zero() {
            Q::one()
        } else {
            Q::zero()
        };
    }
}

/// Expresses a schedule as a full column assignment (holdings derived
/// maximally, makespan tight). The result still has to pass [`IlpInstance::check`].
pub fn assignment_from_schedule(inst: &IlpInstance, s: &Schedule) -> Result<Vec<Q>, EncodeError> {
    let p = &inst.problem;
    let mut values = vec![Q::zero(); inst.variables.len()];
    for pl in &s.placements {
        let (Some(a), Some(t)) = (p.agent_index(&pl.agent), p.network.index_of(&pl.task)) else {
            return Err(EncodeError::Unrepresentable(format!(
                "unknown placement {}/{}",
                pl.agent, pl.task
            )));
        };
        if pl.start >= p.steps() || !inst.x_usable(a, t, pl.start) {
            return Err(EncodeError::Unrepresentable(format!(
                "no column for {} on {} at {}",
                pl.task, pl.agent, pl.start
            )));
        }
        values[inst.maps.x(a, t, pl.start).expect("usable")] = Q::one();
    }
    for c in &s.comms {
        let (Some(i), Some(j), Some(t)) = (
            p.agent_index(&c.src),
            p.agent_index(&c.dst),
            p.network.index_of(&c.task),
        ) else {
            return Err(EncodeError::Unrepresentable(format!(
                "unknown comm {}->{} {}",
                c.src, c.dst, c.task
            )));
        };
        if i == j || c.end > p.steps() || c.bits.len() != (c.end.saturating_sub(c.start)) as usize {
            return Err(EncodeError::Unrepresentable(format!(
                "bad comm {}->{} {}",
                c.src, c.dst, c.task
            )));
        }
        for (off, bits) in c.bits.iter().enumerate() {
            let k = c.start + off as u32;
            values[inst.maps.c(i, j, t, k)] = Q::one();
            if let Some(r) = inst.maps.r(i, j, t, k) {
                values[r] = *bits;
            }
        }
    }
    derive_holdings(inst, &mut values);
    if let Some(z) = inst.maps.z {
        values[z] = q(crate::verify::makespan(p, s) as i128);
    }
    Ok(values)
}

/// Reads a schedule back from a feasible assignment.
pub fn decode(
    p: &ProblemInstance,
    inst: &IlpInstance,
    values: &[Q],
) -> Result<Schedule, EncodeError> {
    inst.check(values)?;
    let maps = &inst.maps;
    let mut s = Schedule::empty();
    for (col, role) in maps.roles().iter().enumerate() {
        if let Column::X { agent, task, step } = *role {
            if values[col].is_one() {
                s.placements.push(Placement {
                    agent: p.agents[agent].id.clone(),
                    task: p.task(task).id.clone(),
                    start: step,
                });
            }
        }
    }
    for i in 0..maps.agents {
        for j in 0..maps.agents {
            if i == j {
                continue;
            }
            for t in 0..maps.tasks {
                let mut k = 0;
                while k < maps.steps {
                    if !values[maps.c(i, j, t, k)].is_one() {
                        k += 1;
                        continue;
                    }
                    let start = k;
                    let mut bits = Vec::new();
                    while k < maps.steps && values[maps.c(i, j, t, k)].is_one() {
                        bits.push(match maps.r(i, j, t, k) {
                            Some(r) => values[r],
                            None => p.bits_per_step(i, j, k),
                        });
                        k += 1;
                    }
                    s.comms.push(CommEvent {
                        src: p.agents[i].id.clone(),
                        dst: p.agents[j].id.clone(),
                        task: p.task(t).id.clone(),
                        start,
                        end: k,
                        bits,
                    });
                }
            }
        }
    }
    crate::verify::finalize(p, &mut s);
    if s.objective_value != inst.objective_value(values) && inst.maps.z.is_none() {
        return Err(EncodeError::InfeasibleAssignment(
            "objective mismatch".into(),
        ));
    }
    Ok(s)
}

/// Convenience: is `values` feasible, and what is it worth.
pub fn value_of(inst: &IlpInstance, values: &[Q]) -> Result<Q, EncodeError> {
    inst.check(values)?;
    Ok(inst.objective_value(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{selfish_schedule, SelfishMode};
    use crate::model::*;
    use crate::rational::q;
    use crate::verify::{check_schedule, evaluate};

    fn chain(n: usize, h: u32, forbid: bool, objective: Objective) -> ProblemInstance {
        let net = SoftwareNetwork::new(vec![
            Task::required("a").size(q(2)).owned_by("p0"),
            Task::optional("b", q(3)).after(&["a"]),
            Task::optional("c", q(1)),
        ])
        .unwrap();
        let agents = (0..n)
            .map(|i| {
                let mut a = AgentProfile::new(format!("p{i}"))
                    .with_cost("a", q(1), q(1))
                    .with_cost("c", q(2), q(1));
                if !(forbid && i == 1) {
                    a = a.with_cost("b", q(1), q(2));
                }
                a
            })
            .collect();
        let mut cg = ContactGraph::new(n, h);
        for i in 1..n {
            cg.set_symmetric(0, i, q(1));
        }
        ProblemInstance::new(net, agents, cg, Horizon::unit_steps(h), objective).unwrap()
    }

    #[test]
    fn count_law_and_forbidden_pairs() {
        for (n, h) in [(1, 1), (2, 3), (3, 4)] {
            let inst = encode(&chain(n, h, false, Objective::OptionalReward), false).unwrap();
            assert_eq!(
                inst.num_binaries(),
                n * n * 3 * h as usize + 2 * n * 3 * h as usize
            );
        }
        let full = encode(&chain(2, 3, false, Objective::OptionalReward), false).unwrap();
        let cut = encode(&chain(2, 3, true, Objective::OptionalReward), false).unwrap();
        assert_eq!(full.num_binaries() - cut.num_binaries(), 3);
        assert!(cut.maps.x(1, 1, 0).is_none());
    }

    #[test]
    fn late_starts_are_fixed_to_zero() {
        let inst = encode(&chain(1, 3, false, Objective::OptionalReward), false).unwrap();
        let x = inst.maps.x(0, 2, 2).unwrap();
        assert!(!inst.x_usable(0, 2, 2));
        assert_eq!(inst.variables[x].upper, q(0));
        assert!(inst.x_usable(0, 2, 1));
    }

    #[test]
    fn columns_are_step_major() {
        let inst = encode(&chain(2, 2, false, Objective::Makespan), false).unwrap();
        let roles = inst.maps.roles();
        let steps: Vec<u32> = roles
            .iter()
            .filter_map(|r| match *r {
                Column::X { step, .. } | Column::D { step, .. } | Column::C { step, .. } => {
                    Some(step)
                }
                _ => None,
            })
            .collect();
        assert!(steps.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(roles.last(), Some(&Column::Z));
        for (c, r) in roles.iter().enumerate() {
            assert_eq!(inst.maps.role(c), *r);
        }
    }

    #[test]
    fn interference_adds_rate_columns_and_capacity_rows() {
        let mut p = chain(3, 3, false, Objective::OptionalReward);
        p.contacts.interference.push(InterferenceSet {
            links: vec![(0, 1), (0, 2)],
            capacity: vec![q(1); 3],
        });
        let plain = encode(&p, false).unwrap();
        let shared = encode(&p, true).unwrap();
        assert_eq!(plain.num_binaries(), shared.num_binaries());
        assert!(shared.num_columns() > plain.num_columns());
        assert_eq!(shared.row_counts().get("capacity"), Some(&3));
        assert_eq!(plain.row_counts().get("capacity"), None);
    }

    #[test]
    fn selfish_assignment_round_trip() {
        for objective in [
            Objective::OptionalReward,
            Objective::Makespan,
            Objective::Energy,
        ] {
            let p = chain(2, 5, false, objective);
            let s = selfish_schedule(&p, SelfishMode::StorageExcepted).unwrap();
            let inst = encode(&p, false).unwrap();
            let values = assignment_from_schedule(&inst, &s).unwrap();
            assert_eq!(inst.objective_value(&values), evaluate(&p, &s));
            assert_eq!(value_of(&inst, &values).unwrap(), evaluate(&p, &s));
            let back = decode(&p, &inst, &values).unwrap();
            check_schedule(&p, &back, false).unwrap();
            assert_eq!(back.placements, s.placements);
        }
    }

    #[test]
    fn horizon_too_short_is_reported() {
        let p = chain(1, 1, false, Objective::OptionalReward);
        assert!(encode(&p, false).is_ok());
        let net = SoftwareNetwork::new(vec![Task::required("a")]).unwrap();
        let agents = vec![AgentProfile::new("p").with_cost("a", q(3), q(1))];
        let p = ProblemInstance::new(
            net,
            agents,
            ContactGraph::new(1, 2),
            Horizon::unit_steps(2),
            Objective::Makespan,
        )
        .unwrap();
        assert!(matches!(
            encode(&p, false),
            Err(EncodeError::InfeasibleHorizon(_))
        ));
    }
}
