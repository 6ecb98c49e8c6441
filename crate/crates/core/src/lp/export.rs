//! CPLEX LP text format.

use std::fmt::Write;

use crate::lp::program::{LinearProgram, Relation};
use crate::scalar::Real;

const TERMS_PER_LINE: usize = 6;

fn num<R: Real>(v: R) -> String {
    format!("{:e}", v.as_f64())
}

/// Writes `lp` in CPLEX LP format. Numbers are written in shortest
/// round-trip form, so the file describes exactly the same program.
pub fn to_lp_format<R: Real>(lp: &LinearProgram<R>, title: &str) -> String {
    let mut out = String::new();
    for line in title.lines() {
        let _ = writeln!(out, "\\ {line}");
    }
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, R)> = lp
        .objective
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| *c != R::zero())
        .collect();
    write_terms(&mut out, lp, &obj);
    out.push_str("\nSubject To\n");
    for row in &lp.rows {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, lp, &row.terms);
        let op = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, hi, name) = (lp.lower[j], lp.upper[j], &lp.names[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(lo), num(hi));
            }
            (true, false) if lo != R::zero() => {
                let _ = writeln!(out, " {name} >= {}", num(lo));
            }
            (true, false) => {}
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", num(hi));
            }
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms<R: Real>(out: &mut String, lp: &LinearProgram<R>, terms: &[(usize, R)]) {
    if terms.is_empty() {
        // an empty left-hand side still needs a variable
        let _ = write!(out, " 0 {}", lp.names[0]);
        return;
    }
    for (i, &(j, c)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < R::zero() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", num(c.abs()), lp.names[j]);
    }
}
