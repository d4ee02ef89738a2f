//! Helpers shared by the integration suites.
#![allow(dead_code)]

pub use rsced::lp::LinearProgram;

pub mod vertex_oracle;

use std::path::PathBuf;

use rsced::lp::LpSolution;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// `b_eqᵀλ − b_inᵀμ + loᵀγ̲ − hiᵀγ̄`, skipping infinite terms whose
/// multipliers are zero.
pub fn dual_objective(lp: &LinearProgram, sol: &LpSolution) -> f64 {
    let mut v = 0.0;
    for (r, l) in lp.eq_rows.iter().zip(&sol.dual_eq) {
        v += r.rhs * l;
    }
    for (r, m) in lp.ineq_rows.iter().zip(&sol.dual_ineq) {
        if r.rhs.is_finite() {
            v -= r.rhs * m;
        }
    }
    for j in 0..lp.n_vars() {
        if lp.lower[j].is_finite() {
            v += lp.lower[j] * sol.dual_lower[j];
        }
        if lp.upper[j].is_finite() {
            v -= lp.upper[j] * sol.dual_upper[j];
        }
    }
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
