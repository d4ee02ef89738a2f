//! Linear programs with labelled rows, a dense revised simplex, and a KKT
//! residual checker.
//!
//! Sign convention for multipliers (Lagrangian form):
//!
//! ```text
//! L = cᵀx − λᵀ(A_eq x − b_eq) + μᵀ(A_in x − b_in) − γ̲ᵀ(x − lo) + γ̄ᵀ(x − hi)
//! ```
//!
//! so stationarity reads `c − A_eqᵀλ + A_inᵀμ − γ̲ + γ̄ = 0` with `μ, γ̲, γ̄ ≥ 0`
//! and `λ` free. This matches the energy-balance multiplier convention where
//! `λ` is the system energy price.

mod dump;
mod kkt;
mod simplex;

pub use dump::write_lp;
pub use kkt::{verify_kkt, KktEntry, KktReport};
pub use simplex::{DenseSimplex, SimplexOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse row `Σ coeffs · x (≤ | =) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub var_labels: Vec<String>,
    /// `A_eq x = b_eq`
    pub eq_rows: Vec<Row>,
    /// `A_in x ≤ b_in`; rows with `rhs = +∞` are inactive and carry a zero multiplier.
    pub ineq_rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, label: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.var_labels.push(label.into());
        self.objective.len() - 1
    }

    pub fn add_eq(&mut self, label: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.eq_rows.push(Row {
            label: label.into(),
            coeffs,
            rhs,
        });
        self.eq_rows.len() - 1
    }

    pub fn add_le(&mut self, label: impl Into<String>, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.ineq_rows.push(Row {
            label: label.into(),
            coeffs,
            rhs,
        });
        self.ineq_rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n || self.var_labels.len() != n {
            return Err(Error::MalformedLp("bound/label vectors do not match the objective".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(Error::MalformedLp(format!("non-finite cost on {}", self.var_labels[j])));
            }
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!(
                    "empty bound interval [{}, {}] on {}",
                    self.lower[j], self.upper[j], self.var_labels[j]
                )));
            }
        }
        for row in self.eq_rows.iter().chain(&self.ineq_rows) {
            if let Some(&(j, a)) = row.coeffs.iter().find(|&&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::MalformedLp(format!(
                    "row {} has bad entry ({j}, {a})",
                    row.label
                )));
            }
        }
        for row in &self.eq_rows {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedLp(format!("equality row {} has non-finite rhs", row.label)));
            }
        }
        for row in &self.ineq_rows {
            if row.rhs.is_nan() || row.rhs == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!("inequality row {} has rhs {}", row.label, row.rhs)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// λ, free sign.
    pub dual_eq: Vec<f64>,
    /// μ ≥ 0.
    pub dual_ineq: Vec<f64>,
    /// γ̲ ≥ 0, multipliers of active lower bounds.
    pub dual_lower: Vec<f64>,
    /// γ̄ ≥ 0, multipliers of active upper bounds.
    pub dual_upper: Vec<f64>,
    /// Farkas multipliers (infeasible) or a primal ray (unbounded).
    pub certificate: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Objective of the Lagrangian dual at the reported multipliers.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut value = 0.0;
        for (row, l) in lp.eq_rows.iter().zip(&self.dual_eq) {
            value += l * row.rhs;
        }
        for (row, m) in lp.ineq_rows.iter().zip(&self.dual_ineq) {
            if *m != 0.0 {
                value -= m * row.rhs;
            }
        }
        for j in 0..lp.n_vars() {
            if self.dual_lower[j] != 0.0 {
                value += self.dual_lower[j] * lp.lower[j];
            }
            if self.dual_upper[j] != 0.0 {
                value -= self.dual_upper[j] * lp.upper[j];
            }
        }
        value
    }
}

/// Seam for swapping the LP backend.
pub trait LpEngine: Send + Sync {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution>;
}

/// Solves with the built-in simplex and default tolerances.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    DenseSimplex::default().solve(lp)
}

#[cfg(test)]
#[path = "../../tests/common/vertex_oracle.rs"]
pub(crate) mod oracle;
