//! Plain-text LP writer. The output is a subset of the CPLEX LP format,
//! described in the repository's `docs/lp-format.md`.

use std::fmt::Write as _;

use super::LinearProgram;

/// Labels may only contain `[A-Za-z0-9_.]` and must not start with a digit.
fn name(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    s
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn terms(out: &mut String, coeffs: impl Iterator<Item = (usize, f64)>, vars: &[String]) {
    let mut first = true;
    for (j, a) in coeffs {
        if a == 0.0 {
            continue;
        }
        let sign = match (a < 0.0, first) {
            (true, true) => "- ",
            (true, false) => " - ",
            (false, true) => "",
            (false, false) => " + ",
        };
        let _ = write!(out, "{sign}{} {}", num(a.abs()), vars[j]);
        first = false;
    }
    if first {
        out.push_str("0 ");
        out.push_str(vars.first().map(String::as_str).unwrap_or("_"));
    }
}

/// Renders `lp` with one labelled constraint per line. Inactive rows
/// (`rhs = +∞`) are written as comments so indices stay recognisable.
pub fn write_lp(lp: &LinearProgram) -> String {
    let vars: Vec<String> = lp.var_labels.iter().map(|l| name(l)).collect();
    let mut out = String::from("Minimize\n obj: ");
    terms(&mut out, lp.objective.iter().copied().enumerate(), &vars);
    out.push_str("\nSubject To\n");
    for row in &lp.eq_rows {
        let _ = write!(out, " {}: ", name(&row.label));
        terms(&mut out, row.coeffs.iter().copied(), &vars);
        let _ = writeln!(out, " = {}", num(row.rhs));
    }
    for row in &lp.ineq_rows {
        if row.rhs == f64::INFINITY {
            let _ = writeln!(out, "\\ {}: inactive", name(&row.label));
            continue;
        }
        let _ = write!(out, " {}: ", name(&row.label));
        terms(&mut out, row.coeffs.iter().copied(), &vars);
        let _ = writeln!(out, " <= {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (j, v) in vars.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let _ = match (lo.is_finite(), hi.is_finite()) {
            (false, false) => writeln!(out, " {v} free"),
            _ if lo == hi => writeln!(out, " {v} = {}", num(lo)),
            _ => writeln!(out, " {} <= {v} <= {}", num(lo), num(hi)),
        };
    }
    out.push_str("End\n");
    out
}
