use serde::{Deserialize, Serialize};

use super::{LinearProgram, LpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    PrimalFeasibility,
    DualFeasibility,
    Stationarity,
    Complementarity,
}

/// One condition that exceeded the tolerance, keyed by row or variable label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktEntry {
    pub label: String,
    pub condition: Condition,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub max_primal_residual: f64,
    /// Sign violations of the multipliers and stationarity, whichever is larger.
    pub max_dual_residual: f64,
    pub max_stationarity_residual: f64,
    pub max_complementarity_residual: f64,
    pub violations: Vec<KktEntry>,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.max_primal_residual
            .max(self.max_dual_residual)
            .max(self.max_complementarity_residual)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Evaluates the KKT conditions of `lp` at `sol` (see the module-level sign
/// convention). Entries above `tol` are listed in `violations`.
pub fn verify_kkt(lp: &LinearProgram, sol: &LpSolution, tol: f64) -> KktReport {
    let n = lp.n_vars();
    let x = &sol.primal;
    let mut report = KktReport {
        max_primal_residual: 0.0,
        max_dual_residual: 0.0,
        max_stationarity_residual: 0.0,
        max_complementarity_residual: 0.0,
        violations: Vec::new(),
    };
    let record = |report: &mut KktReport, label: &str, condition: Condition, r: f64| {
        let slot = match condition {
            Condition::PrimalFeasibility => &mut report.max_primal_residual,
            Condition::DualFeasibility | Condition::Stationarity => &mut report.max_dual_residual,
            Condition::Complementarity => &mut report.max_complementarity_residual,
        };
        *slot = slot.max(r);
        if condition == Condition::Stationarity {
            report.max_stationarity_residual = report.max_stationarity_residual.max(r);
        }
        if r > tol {
            report.violations.push(KktEntry {
                label: label.to_string(),
                condition,
                residual: r,
            });
        }
    };

    let mut grad = lp.objective.clone();
    for (row, &l) in lp.eq_rows.iter().zip(&sol.dual_eq) {
        let r = (row.activity(x) - row.rhs).abs();
        record(&mut report, &row.label, Condition::PrimalFeasibility, r);
        for &(j, a) in &row.coeffs {
            grad[j] -= l * a;
        }
    }
    for (row, &m) in lp.ineq_rows.iter().zip(&sol.dual_ineq) {
        let act = row.activity(x);
        record(&mut report, &row.label, Condition::PrimalFeasibility, (act - row.rhs).max(0.0));
        record(&mut report, &row.label, Condition::DualFeasibility, (-m).max(0.0));
        if m != 0.0 {
            let cs = if row.rhs.is_finite() { (m * (row.rhs - act)).abs() } else { f64::INFINITY };
            record(&mut report, &row.label, Condition::Complementarity, cs);
            for &(j, a) in &row.coeffs {
                grad[j] += m * a;
            }
        }
    }
    for j in 0..n {
        let label = &lp.var_labels[j];
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let bound_violation = (lo - x[j]).max(x[j] - hi).max(0.0);
        record(&mut report, label, Condition::PrimalFeasibility, bound_violation);
        let (gl, gu) = (sol.dual_lower[j], sol.dual_upper[j]);
        record(&mut report, label, Condition::DualFeasibility, (-gl).max(-gu).max(0.0));
        if gl != 0.0 {
            let cs = if lo.is_finite() { (gl * (x[j] - lo)).abs() } else { f64::INFINITY };
            record(&mut report, label, Condition::Complementarity, cs);
        }
        if gu != 0.0 {
            let cs = if hi.is_finite() { (gu * (hi - x[j])).abs() } else { f64::INFINITY };
            record(&mut report, label, Condition::Complementarity, cs);
        }
        grad[j] += gu - gl;
        record(&mut report, label, Condition::Stationarity, grad[j].abs());
    }
    report
}
