//! CPLEX-LP text dump for debugging.

use super::model::{LpModel, Sense};
use std::fmt::Write;

fn term(out: &mut String, first: bool, coeff: f64, name: &str) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} {name}", -coeff);
    } else if first {
        let _ = write!(out, " {coeff} {name}");
    } else {
        let _ = write!(out, " + {coeff} {name}");
    }
}

pub fn to_lp_format(model: &LpModel) -> String {
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (v, var) in model.vars.iter().enumerate() {
        if var.cost != 0.0 {
            term(&mut out, first, var.cost, &model.var_name(v));
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (r, row) in model.rows.iter().enumerate() {
        let _ = write!(out, " r{r}:");
        for (k, &(v, a)) in row.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, &model.var_name(v));
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (v, var) in model.vars.iter().enumerate() {
        let name = model.var_name(v);
        if var.upper.is_finite() {
            let _ = writeln!(out, " {} <= {name} <= {}", var.lower, var.upper);
        } else if var.lower != 0.0 {
            let _ = writeln!(out, " {name} >= {}", var.lower);
        }
    }
    out.push_str("End\n");
    out
}
