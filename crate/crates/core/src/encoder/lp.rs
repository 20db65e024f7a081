use std::fmt::Write;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{IlpInstance, VarKind};
use crate::rational::{format_q, Q};

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Q>) -> i128 {
    values.fold(1i128, |acc, v| acc.lcm(v.denom()))
}

fn push_terms(out: &mut String, inst: &IlpInstance, terms: &[(usize, Q)], scale: i128) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&inst.variables[0].name);
        return;
    }
    for (i, (col, a)) in terms.iter().enumerate() {
        let v = *a * Q::from_integer(scale);
        let sign = if v.is_negative() { "-" } else { "+" };
        let mag = format_q(&v.abs());
        if i == 0 && sign == "+" {
            let _ = write!(out, " {} {}", mag, inst.variables[*col].name);
        } else {
            let _ = write!(out, " {} {} {}", sign, mag, inst.variables[*col].name);
        }
    }
}

/// Writes the program in CPLEX LP format. Constraint rows are scaled to
/// integer coefficients; output is byte-for-byte deterministic.
pub fn export_lp(inst: &IlpInstance) -> String {
    let mut out = String::new();
    out.push_str("\\ commsched\nMaximize\n obj:");
    let obj_scale = lcm_of_denominators(inst.objective.iter().map(|(_, a)| a));
    push_terms(&mut out, inst, &inst.objective, obj_scale);
    if obj_scale != 1 {
        let _ = write!(out, "\n\\ objective scaled by {obj_scale}");
    }
    out.push_str("\nSubject To\n");
    for row in &inst.constraints {
        let scale = lcm_of_denominators(
            row.terms
                .iter()
                .map(|(_, a)| a)
                .chain(std::iter::once(&row.rhs)),
        );
        let _ = write!(out, " {}:", row.name);
        push_terms(&mut out, inst, &row.terms, scale);
        let rhs = row.rhs * Q::from_integer(scale);
        let _ = writeln!(out, " {} {}", row.relation.symbol(), format_q(&rhs));
    }
    out.push_str("Bounds\n");
    for v in &inst.variables {
        if v.kind == VarKind::Continuous || !v.upper.is_zero() {
            if v.kind == VarKind::Continuous {
                let _ = writeln!(
                    out,
                    " {} <= {} <= {}",
                    lp_number(&v.lower),
                    v.name,
                    lp_number(&v.upper)
                );
            }
        } else {
            let _ = writeln!(out, " {} = 0", v.name);
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for v in inst.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        if line.len() + v.name.len() > 240 {
            let _ = writeln!(out, "{line}");
            line.clear();
        }
        line.push(' ');
        line.push_str(&v.name);
    }
    if !line.is_empty() {
        let _ = writeln!(out, "{line}");
    }
    out.push_str("End\n");
    out
}

fn lp_number(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}", crate::rational::to_f64(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::model::*;
    use crate::rational::{q, qf};

    fn instance() -> IlpInstance {
        let net = SoftwareNetwork::new(vec![
            Task::required("a").size(q(3)),
            Task::optional("b", qf(5, 2)).after(&["a"]),
        ])
        .unwrap();
        let agents = vec![
            AgentProfile::new("x")
                .with_cost("a", q(1), qf(1, 3))
                .with_cost("b", q(1), q(1)),
            AgentProfile::new("y").with_cost("b", q(1), q(1)),
        ];
        let mut cg = ContactGraph::new(2, 3);
        cg.set_symmetric(0, 1, qf(3, 2));
        let p = ProblemInstance::new(
            net,
            agents,
            cg,
            Horizon::unit_steps(3),
            Objective::OptionalReward,
        )
        .unwrap();
        encode(&p, false).unwrap()
    }

    #[test]
    fn deterministic_integer_rows() {
        let inst = instance();
        let text = export_lp(&inst);
        assert_eq!(text, export_lp(&instance()));
        assert!(text.starts_with("\\ commsched\nMaximize\n obj:"));
        assert!(text.contains("\\ objective scaled by 2"));
        for section in ["Subject To", "Bounds", "Binaries", "End"] {
            assert!(text.contains(section), "{section}");
        }
        let rows = text
            .split("Subject To\n")
            .nth(1)
            .unwrap()
            .split("Bounds")
            .next()
            .unwrap();
        assert_eq!(rows.lines().count(), inst.constraints.len());
        assert!(!rows.contains('/'));
    }
}
