//! Activity-based bound propagation over integer-scaled rows, with an undo
//! trail. Every column is normalized to the unit interval: continuous
//! columns are substituted as `value = upper * u` with `u` in `[0, 1]`.

use std::collections::VecDeque;

use num_integer::Integer;
use num_traits::Zero;

use crate::encoder::{IlpInstance, Relation, RowKind, VarKind};
use crate::rational::Q;

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(u32, i128)>,
    rhs: i128,
}

#[derive(Debug, Clone, Copy)]
enum Change {
    Raised(u32),
    Lowered(u32),
}

#[derive(Debug, Clone)]
pub(crate) struct Engine {
    pub lb: Vec<bool>,
    pub ub: Vec<bool>,
    binary: Vec<bool>,
    rows: Vec<Row>,
    col_rows: Vec<Vec<(u32, i128)>>,
    minact: Vec<i128>,
    trail: Vec<Change>,
    /// Continuous column switched off together with its binary.
    gate: Vec<Option<u32>>,
    /// Columns forced to zero when the key column is set to one.
    implies_zero: Vec<Vec<u32>>,
    queue: VecDeque<u32>,
    queued: Vec<bool>,
    obj: Vec<Q>,
    pub fixed_obj: Q,
    /// Row index (into `rows`) of each D column's learning row, if any.
    learning_row: Vec<Option<u32>>,
}

fn scale_row(terms: &[(usize, Q)], rhs: Q) -> Row {
    let l = terms
        .iter()
        .map(|(_, a)| *a.denom())
        .chain(std::iter::once(*rhs.denom()))
        .fold(1i128, |acc, d| acc.lcm(&d));
    let s = Q::from_integer(l);
    Row {
        terms: terms
            .iter()
            .map(|(c, a)| (*c as u32, (*a * s).to_integer()))
            .collect(),
        rhs: (rhs * s).to_integer(),
    }
}

impl Engine {
    /// Builds the engine over every row that does not touch the makespan
    /// column. Rows are not yet propagated; call [`Engine::initialize`].
    pub fn new(inst: &IlpInstance) -> Self {
        let ncols = inst.variables.len();
        let mut binary = vec![false; ncols];
        let mut lb = vec![false; ncols];
        let mut ub = vec![false; ncols];
        let mut span = vec![Q::zero(); ncols];
        for (c, v) in inst.variables.iter().enumerate() {
            binary[c] = v.kind == VarKind::Binary;
            lb[c] = !v.lower.is_zero() && v.kind == VarKind::Binary;
            ub[c] = !v.upper.is_zero();
            span[c] = if v.kind == VarKind::Binary {
                Q::from_integer(1)
            } else {
                v.upper
            };
        }
        let z = inst.maps.z;
        let mut rows = Vec::new();
        let mut learning_row = vec![None; ncols];
        for r in &inst.constraints {
            if z.is_some_and(|z| r.terms.iter().any(|(c, _)| *c == z)) {
                continue;
            }
            let terms: Vec<(usize, Q)> = r
                .terms
                .iter()
                .filter(|(c, _)| !span[*c].is_zero())
                .map(|(c, a)| (*c, *a * span[*c]))
                .collect();
            if r.kind == RowKind::Learning {
                if let Some((c, _)) = r.terms.iter().find(|(c, a)| *a > Q::zero() && binary[*c]) {
                    learning_row[*c] = Some(rows.len() as u32);
                }
            }
            match r.relation {
                Relation::Le => rows.push(scale_row(&terms, r.rhs)),
                Relation::Ge => {
                    let neg: Vec<(usize, Q)> = terms.iter().map(|(c, a)| (*c, -*a)).collect();
                    rows.push(scale_row(&neg, -r.rhs));
                }
                Relation::Eq => {
                    rows.push(scale_row(&terms, r.rhs));
                    let neg: Vec<(usize, Q)> = terms.iter().map(|(c, a)| (*c, -*a)).collect();
                    rows.push(scale_row(&neg, -r.rhs));
                }
            }
        }
        let mut col_rows = vec![Vec::new(); ncols];
        let mut minact = vec![0i128; rows.len()];
        for (ri, row) in rows.iter().enumerate() {
            for &(c, a) in &row.terms {
                col_rows[c as usize].push((ri as u32, a));
                let cu = c as usize;
                if a > 0 && lb[cu] {
                    minact[ri] += a;
                } else if a < 0 && ub[cu] {
                    minact[ri] += a;
                }
            }
        }
        // zero-width continuous columns were dropped from rows above, so the
        // span-zero columns never contribute
        let mut obj = vec![Q::zero(); ncols];
        for (c, a) in &inst.objective {
            obj[*c] = *a;
        }
        let fixed_obj = (0..ncols).filter(|&c| lb[c]).map(|c| obj[c]).sum();
        let nrows = rows.len();
        Engine {
            lb,
            ub,
            binary,
            rows,
            col_rows,
            minact,
            trail: Vec::new(),
            gate: vec![None; ncols],
            implies_zero: vec![Vec::new(); ncols],
            queue: VecDeque::new(),
            queued: vec![false; nrows],
            obj,
            fixed_obj,
            learning_row,
        }
    }

    pub fn set_gate(&mut self, binary_col: usize, continuous_col: usize) {
        self.gate[binary_col] = Some(continuous_col as u32);
    }

    pub fn add_implication(&mut self, when_one: usize, zero: usize) {
        self.implies_zero[when_one].push(zero as u32);
    }

    pub fn is_fixed(&self, c: usize) -> bool {
        self.lb[c] || !self.ub[c]
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    fn enqueue(&mut self, r: u32) {
        if !self.queued[r as usize] {
            self.queued[r as usize] = true;
            self.queue.push_back(r);
        }
    }

    /// Raises the lower bound of `c` to one. Returns false on conflict.
    pub fn fix_one(&mut self, c: usize) -> bool {
        if self.lb[c] {
            return true;
        }
        if !self.ub[c] {
            return false;
        }
        self.lb[c] = true;
        self.trail.push(Change::Raised(c as u32));
        self.fixed_obj += self.obj[c];
        for k in 0..self.col_rows[c].len() {
            let (r, a) = self.col_rows[c][k];
            if a > 0 {
                self.minact[r as usize] += a;
                self.enqueue(r);
            }
        }
        for k in 0..self.implies_zero[c].len() {
            let z = self.implies_zero[c][k] as usize;
            if !self.fix_zero(z) {
                return false;
            }
        }
        true
    }

    /// Lowers the upper bound of `c` to zero. Returns false on conflict.
    pub fn fix_zero(&mut self, c: usize) -> bool {
        if !self.ub[c] {
            return true;
        }
        if self.lb[c] {
            return false;
        }
        self.ub[c] = false;
        self.trail.push(Change::Lowered(c as u32));
        for k in 0..self.col_rows[c].len() {
            let (r, a) = self.col_rows[c][k];
            if a < 0 {
                self.minact[r as usize] -= a;
                self.enqueue(r);
            }
        }
        if let Some(g) = self.gate[c] {
            return self.fix_zero(g as usize);
        }
        true
    }

    fn clear_queue(&mut self) {
        while let Some(r) = self.queue.pop_front() {
            self.queued[r as usize] = false;
        }
    }

    /// Runs to a fixpoint. Returns false on conflict.
    pub fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop_front() {
            self.queued[r as usize] = false;
            let ri = r as usize;
            let slack = self.rows[ri].rhs - self.minact[ri];
            if slack < 0 {
                self.clear_queue();
                return false;
            }
            for k in 0..self.rows[ri].terms.len() {
                let (c, a) = self.rows[ri].terms[k];
                let c = c as usize;
                if !self.binary[c] || self.is_fixed(c) || a.abs() <= slack {
                    continue;
                }
                let ok = if a > 0 {
                    self.fix_zero(c)
                } else {
                    self.fix_one(c)
                };
                if !ok {
                    self.clear_queue();
                    return false;
                }
            }
        }
        true
    }

    /// Queues every row; call once before the first [`Engine::propagate`].
    pub fn initialize(&mut self) -> bool {
        for r in 0..self.rows.len() {
            self.enqueue(r as u32);
        }
        self.propagate()
    }

    pub fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("non-empty trail") {
                Change::Raised(c) => {
                    let c = c as usize;
                    self.lb[c] = false;
                    self.fixed_obj -= self.obj[c];
                    for &(r, a) in &self.col_rows[c] {
                        if a > 0 {
                            self.minact[r as usize] -= a;
                        }
                    }
                }
                Change::Lowered(c) => {
                    let c = c as usize;
                    self.ub[c] = true;
                    for &(r, a) in &self.col_rows[c] {
                        if a < 0 {
                            self.minact[r as usize] += a;
                        }
                    }
                }
            }
        }
    }

    /// True when setting the D column `c` to one cannot violate its own
    /// learning row under any completion of the other columns.
    pub fn holding_is_free(&self, c: usize) -> bool {
        let Some(r) = self.learning_row[c] else {
            return false;
        };
        let row = &self.rows[r as usize];
        let mut maxact = 0i128;
        for &(col, a) in &row.terms {
            let col = col as usize;
            let v = if col == c {
                true
            } else if a > 0 {
                self.ub[col]
            } else {
                self.lb[col]
            };
            if v {
                maxact += a;
            }
        }
        maxact <= row.rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::model::*;
    use crate::rational::q;

    fn chain() -> ProblemInstance {
        let net =
            SoftwareNetwork::new(vec![Task::required("a"), Task::required("b").after(&["a"])])
                .unwrap();
        let agents =
            vec![AgentProfile::new("r")
                .with_cost("a", q(2), q(1))
                .with_cost("b", q(1), q(1))];
        ProblemInstance::new(
            net,
            agents,
            ContactGraph::new(1, 4),
            Horizon::unit_steps(4),
            Objective::Makespan,
        )
        .unwrap()
    }

    #[test]
    fn root_propagation_pins_a_tight_chain() {
        let p = chain();
        let inst = encode(&p, false).unwrap();
        let mut e = Engine::new(&inst);
        assert!(e.initialize());
        // b needs a's product, which exists at step 2 at the earliest, and b
        // must finish by 4, so b starts at 2 or 3; a cannot finish if it
        // starts at 3
        for k in [0u32, 1] {
            let x = inst.maps.x(0, 1, k).unwrap();
            assert!(!e.ub[x], "b cannot start at {k}");
        }
        let x = inst.maps.x(0, 0, 3).unwrap();
        assert!(!e.ub[x], "a cannot start at 3");
    }

    #[test]
    fn undo_restores_state() {
        let p = chain();
        let inst = encode(&p, false).unwrap();
        let mut e = Engine::new(&inst);
        assert!(e.initialize());
        let before = (e.lb.clone(), e.ub.clone(), e.minact.clone());
        let m = e.mark();
        let x = inst.maps.x(0, 0, 0).unwrap();
        assert!(e.fix_one(x));
        assert!(e.propagate());
        assert!(e.lb[inst.maps.x(0, 1, 2).unwrap()] || e.ub[inst.maps.x(0, 1, 3).unwrap()]);
        e.undo(m);
        assert_eq!(before, (e.lb.clone(), e.ub.clone(), e.minact.clone()));
    }
}
