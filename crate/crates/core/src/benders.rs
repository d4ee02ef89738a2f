//! Benders decomposition of the two-stage dispatch LP.
//!
//! The first stage `x₀ = (z, g, r̲, r̄)` lives in the master problem; each
//! scenario's recourse `x_k = (y_k, δg_k, δd_k)` is a subproblem
//! `min c_kᵀx_k s.t. E_k x_k ≤ b_k − A_k x₀`, solved with a penalised slack
//! on every row so it is feasible for any `x₀`. Its row multipliers `λ_k`
//! give the cut `t_k ≥ J_k + (x₀ − x₀ˡ)ᵀA_kᵀλ_k`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{DenseSimplex, LinearProgram, LpEngine, LpStatus, Row};
use crate::model::{Variant, VariableIndex};
use crate::parallel;

/// A coupling row `A x₀ + E x_k ≤ rhs`; `xk` indices are local to the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub label: String,
    pub x0: Vec<(usize, f64)>,
    pub xk: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBlock {
    /// Position of `x_k` in the monolithic variable vector.
    pub offset: usize,
    /// Already includes the `p_k/(1−α)` weight.
    pub cost: Vec<f64>,
    pub var_labels: Vec<String>,
    pub rows: Vec<BlockRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    /// First-stage problem: variables `0..first_stage` and the rows that touch only them.
    pub master: LinearProgram,
    pub blocks: Vec<ScenarioBlock>,
    /// Slack penalty per unit of violation in every subproblem row.
    pub penalty: f64,
}

/// Slack penalty relative to the largest cost or VoLL coefficient.
pub const PENALTY_FACTOR: f64 = 1e6;

fn split(row: &Row, first: usize, local: std::ops::Range<usize>, sign: f64, label: String) -> Result<BlockRow> {
    let mut out = BlockRow {
        label,
        x0: Vec::new(),
        xk: Vec::new(),
        rhs: sign * row.rhs,
    };
    for &(j, a) in &row.coeffs {
        if j < first {
            out.x0.push((j, sign * a));
        } else if local.contains(&j) {
            out.xk.push((j - local.start, sign * a));
        } else {
            return Err(Error::NotDecomposable(format!(
                "row {} couples scenario blocks",
                row.label
            )));
        }
    }
    Ok(out)
}

/// Splits an LP built by the model module into master and scenario blocks.
/// Scenario equalities become `≤` pairs and scenario variable bounds become
/// rows, so every subproblem multiplier is sign-constrained.
pub fn decompose(lp: &LinearProgram, idx: &VariableIndex) -> Result<BlockDecomposition> {
    if !matches!(idx.variant, Variant::Rsced | Variant::Csced) {
        return Err(Error::NotDecomposable(format!("{} has no second stage", idx.variant.name())));
    }
    let first = idx.first_stage;
    let mut expected = first;
    for r in &idx.scenario_vars {
        if r.start != expected {
            return Err(Error::NotDecomposable("scenario variables are not contiguous after the first stage".into()));
        }
        expected = r.end;
    }
    if expected != lp.n_vars() {
        return Err(Error::NotDecomposable("variables outside the scenario blocks".into()));
    }

    let mut master = LinearProgram::new();
    for j in 0..first {
        master.add_var(lp.var_labels[j].clone(), lp.objective[j], lp.lower[j], lp.upper[j]);
    }
    let only_first = |row: &Row| row.coeffs.iter().all(|&(j, _)| j < first);
    let mut claimed_eq = vec![false; lp.eq_rows.len()];
    let mut claimed_in = vec![false; lp.ineq_rows.len()];
    for (i, row) in lp.eq_rows.iter().enumerate() {
        if only_first(row) {
            master.add_eq(row.label.clone(), row.coeffs.clone(), row.rhs);
            claimed_eq[i] = true;
        }
    }
    for (i, row) in lp.ineq_rows.iter().enumerate() {
        if only_first(row) && !idx.scenario_rows.iter().any(|r| r.contains(&i)) {
            master.add_le(row.label.clone(), row.coeffs.clone(), row.rhs);
            claimed_in[i] = true;
        }
    }

    let mut penalty_scale: f64 = 1.0;
    for c in &lp.objective {
        penalty_scale = penalty_scale.max(c.abs());
    }
    for &e in &idx.epigraph {
        for &(_, a) in &lp.ineq_rows[e].coeffs {
            penalty_scale = penalty_scale.max(a.abs());
        }
    }

    let mut blocks = Vec::new();
    for k in 0..idx.scenario_vars.len() {
        let local = idx.scenario_vars[k].clone();
        let mut rows = Vec::new();
        let eq = idx.se_balance[k];
        claimed_eq[eq] = true;
        let row = &lp.eq_rows[eq];
        rows.push(split(row, first, local.clone(), 1.0, format!("{}.le", row.label))?);
        rows.push(split(row, first, local.clone(), -1.0, format!("{}.ge", row.label))?);
        for i in idx.scenario_rows[k].clone() {
            claimed_in[i] = true;
            let row = &lp.ineq_rows[i];
            rows.push(split(row, first, local.clone(), 1.0, row.label.clone())?);
        }
        for (t, j) in local.clone().enumerate() {
            let label = &lp.var_labels[j];
            if lp.lower[j].is_finite() {
                rows.push(BlockRow {
                    label: format!("{label}.lower"),
                    x0: vec![],
                    xk: vec![(t, -1.0)],
                    rhs: -lp.lower[j],
                });
            }
            if lp.upper[j].is_finite() {
                rows.push(BlockRow {
                    label: format!("{label}.upper"),
                    x0: vec![],
                    xk: vec![(t, 1.0)],
                    rhs: lp.upper[j],
                });
            }
        }
        blocks.push(ScenarioBlock {
            offset: local.start,
            cost: lp.objective[local.clone()].to_vec(),
            var_labels: lp.var_labels[local].to_vec(),
            rows,
        });
    }
    if claimed_eq.iter().chain(&claimed_in).any(|c| !c) {
        return Err(Error::NotDecomposable("some rows belong to neither stage".into()));
    }
    Ok(BlockDecomposition {
        master,
        blocks,
        penalty: PENALTY_FACTOR * penalty_scale,
    })
}

impl BlockDecomposition {
    pub fn first_stage_len(&self) -> usize {
        self.master.n_vars()
    }

    /// Monolithic LP in the decomposed form: master rows and bounds, then
    /// every block row as an inequality over free second-stage variables.
    pub fn reassemble(&self) -> LinearProgram {
        let mut lp = self.master.clone();
        for b in &self.blocks {
            for (t, label) in b.var_labels.iter().enumerate() {
                lp.add_var(label.clone(), b.cost[t], f64::NEG_INFINITY, f64::INFINITY);
            }
        }
        for b in &self.blocks {
            for r in &b.rows {
                let mut coeffs = r.x0.clone();
                coeffs.extend(r.xk.iter().map(|&(t, a)| (b.offset + t, a)));
                lp.add_le(r.label.clone(), coeffs, r.rhs);
            }
        }
        lp
    }

    /// Subproblem LP for scenario `k` at `x0`: the block's variables followed
    /// by one penalised slack per finite row.
    fn subproblem_lp(&self, k: usize, x0: &[f64]) -> (LinearProgram, Vec<usize>) {
        let b = &self.blocks[k];
        let mut lp = LinearProgram::new();
        for (t, label) in b.var_labels.iter().enumerate() {
            lp.add_var(label.clone(), b.cost[t], f64::NEG_INFINITY, f64::INFINITY);
        }
        let mut rows = Vec::new();
        for (i, r) in b.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                continue;
            }
            let shift: f64 = r.x0.iter().map(|&(j, a)| a * x0[j]).sum();
            let s = lp.add_var(format!("slack.{}", r.label), self.penalty, 0.0, f64::INFINITY);
            let mut coeffs = r.xk.clone();
            coeffs.push((s, -1.0));
            lp.add_le(r.label.clone(), coeffs, r.rhs - shift);
            rows.push(i);
        }
        (lp, rows)
    }

    /// Solves scenario `k`'s penalised subproblem at `x0`.
    pub fn solve_subproblem(&self, k: usize, x0: &[f64]) -> Result<SubproblemResult> {
        self.solve_subproblem_with(&DenseSimplex::default(), k, x0)
    }

    pub fn solve_subproblem_with(&self, engine: &dyn LpEngine, k: usize, x0: &[f64]) -> Result<SubproblemResult> {
        let b = &self.blocks[k];
        let (lp, active) = self.subproblem_lp(k, x0);
        let sol = engine.solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => return Err(Error::SubproblemUnbounded(k)),
            LpStatus::Infeasible => {
                return Err(Error::NumericalFailure(format!(
                    "penalised subproblem {k} reported infeasible"
                )))
            }
        }
        let mut duals = vec![0.0; b.rows.len()];
        for (r, &i) in active.iter().enumerate() {
            duals[i] = sol.dual_ineq[r];
        }
        let nk = b.cost.len();
        let slack = sol.primal[nk..].iter().fold(0.0, |a: f64, &s| a.max(s));
        let mut gradient = vec![0.0; x0.len()];
        for (r, &l) in b.rows.iter().zip(&duals) {
            if l != 0.0 {
                for &(j, a) in &r.x0 {
                    gradient[j] += a * l;
                }
            }
        }
        Ok(SubproblemResult {
            value: sol.objective,
            duals,
            gradient,
            xk: sol.primal[..nk].to_vec(),
            max_slack: slack,
        })
    }

    /// Value of the dual subproblem `−λᵀ(b_k − A_k x₀)` at the given multipliers.
    pub fn dual_value(&self, k: usize, x0: &[f64], duals: &[f64]) -> f64 {
        self.blocks[k]
            .rows
            .iter()
            .zip(duals)
            .filter(|(_, &l)| l != 0.0)
            .map(|(r, &l)| {
                let shift: f64 = r.x0.iter().map(|&(j, a)| a * x0[j]).sum();
                -l * (r.rhs - shift)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemResult {
    /// `J_k`, $/h (weighted by `p_k/(1−α)`).
    pub value: f64,
    /// `λ_k ≥ 0`, one per block row.
    pub duals: Vec<f64>,
    /// `A_kᵀλ_k`
    pub gradient: Vec<f64>,
    pub xk: Vec<f64>,
    pub max_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub scenario: usize,
    pub anchor: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl Cut {
    pub fn eval(&self, x0: &[f64]) -> f64 {
        self.value
            + self
                .gradient
                .iter()
                .zip(x0.iter().zip(&self.anchor))
                .map(|(g, (x, a))| g * (x - a))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `J_k ≤ t_k + tol` for every scenario.
    Converged,
    /// Relative gap between the bounds fell below `gap_tol`.
    GapClosed,
    IterationLimit,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::GapClosed => "gap closed",
            Termination::IterationLimit => "iteration limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersIteration {
    pub iteration: usize,
    /// Master objective before this iteration's cuts.
    pub lower_bound: f64,
    /// `c₀ᵀx₀ + Σ_k J_k` at this iteration's first-stage point.
    pub upper_bound: f64,
    pub best_upper_bound: f64,
    pub cuts: usize,
    pub millis: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BendersTrace {
    pub iterations: Vec<BendersIteration>,
    pub termination: Option<Termination>,
    /// Largest amount by which a stored cut overestimated a later `J_k`.
    pub max_cut_violation: f64,
    /// Largest subproblem slack at the reported point.
    pub final_slack: f64,
}

impl BendersTrace {
    pub fn lower_bounds(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.lower_bound).collect()
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.iterations
            .windows(2)
            .all(|w| w[1].lower_bound >= w[0].lower_bound - tol * (1.0 + w[0].lower_bound.abs()))
    }

    /// CSV with columns `iteration,lower_bound,upper_bound,cuts,millis`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["iteration", "lower_bound", "upper_bound", "cuts", "millis"]).map_err(io)?;
        for it in &self.iterations {
            w.write_record([
                it.iteration.to_string(),
                it.lower_bound.to_string(),
                it.upper_bound.to_string(),
                it.cuts.to_string(),
                format!("{:.3}", it.millis),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendersOptions {
    /// Absolute tolerance on `J_k ≤ t_k`.
    pub tol: f64,
    /// Relative gap `(UB − LB)/(1 + |UB|)` that also stops the loop.
    pub gap_tol: f64,
    pub max_iterations: usize,
    /// Solve subproblems on the worker pool.
    pub parallel: bool,
}

impl Default for BendersOptions {
    fn default() -> Self {
        BendersOptions {
            tol: 1e-6,
            gap_tol: 1e-7,
            max_iterations: 500,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersSolution {
    /// Full primal vector in the monolithic variable order.
    pub primal: Vec<f64>,
    pub objective: f64,
    pub trace: BendersTrace,
    pub cuts: Vec<Cut>,
    pub warnings: Vec<String>,
}

/// Algorithm: solve the master for `x₀`, evaluate every subproblem there,
/// stop once each `J_k` is matched by its `t_k`, otherwise add one cut per
/// scenario and repeat. The returned point is the best upper bound seen.
pub fn benders_solve(dec: &BlockDecomposition, opts: &BendersOptions) -> Result<BendersSolution> {
    let engine = DenseSimplex::default();
    let pool = if opts.parallel { Some(parallel::pool()?) } else { None };
    let n0 = dec.first_stage_len();
    let k_count = dec.blocks.len();

    let mut master = dec.master.clone();
    let t: Vec<usize> = (0..k_count)
        .map(|k| master.add_var(format!("t[{k}]"), 1.0, 0.0, f64::INFINITY))
        .collect();

    let mut trace = BendersTrace::default();
    let mut cuts: Vec<Cut> = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<SubproblemResult>)> = None;
    let started = Instant::now();

    for iteration in 1..=opts.max_iterations {
        let m = engine.solve(&master)?;
        match m.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible("Benders master".into())),
            LpStatus::Unbounded => return Err(Error::Unbounded("Benders master".into())),
        }
        let x0 = m.primal[..n0].to_vec();
        let t_val: Vec<f64> = t.iter().map(|&j| m.primal[j]).collect();
        let lower = m.objective;

        let solve_k = |k: usize| dec.solve_subproblem_with(&engine, k, &x0);
        let subs: Vec<SubproblemResult> = match &pool {
            Some(p) => p.install(|| (0..k_count).into_par_iter().map(solve_k).collect::<Result<Vec<_>>>())?,
            None => (0..k_count).map(solve_k).collect::<Result<Vec<_>>>()?,
        };

        for cut in &cuts {
            let v = cut.eval(&x0) - subs[cut.scenario].value;
            trace.max_cut_violation = trace.max_cut_violation.max(v);
        }

        let first_cost = dec.master.objective_value(&x0);
        let upper = first_cost + subs.iter().map(|s| s.value).sum::<f64>();
        if best.as_ref().is_none_or(|b| upper < b.0) {
            best = Some((upper, x0.clone(), subs.clone()));
        }
        let best_upper = best.as_ref().map(|b| b.0).unwrap_or(upper);
        let converged = subs.iter().zip(&t_val).all(|(s, &tk)| s.value <= tk + opts.tol);
        let gap_closed = best_upper - lower <= opts.gap_tol * (1.0 + best_upper.abs());

        if !converged && !gap_closed {
            for (k, s) in subs.iter().enumerate() {
                let cut = Cut {
                    scenario: k,
                    anchor: x0.clone(),
                    value: s.value,
                    gradient: s.gradient.clone(),
                };
                // t_k ≥ J + gᵀ(x₀ − x̂)  ⇔  gᵀx₀ − t_k ≤ gᵀx̂ − J
                let mut coeffs: Vec<(usize, f64)> =
                    cut.gradient.iter().enumerate().filter(|(_, &g)| g != 0.0).map(|(j, &g)| (j, g)).collect();
                coeffs.push((t[k], -1.0));
                let rhs = cut.gradient.iter().zip(&cut.anchor).map(|(g, a)| g * a).sum::<f64>() - cut.value;
                master.add_le(format!("cut[{k},{iteration}]"), coeffs, rhs);
                cuts.push(cut);
            }
        }
        trace.iterations.push(BendersIteration {
            iteration,
            lower_bound: lower,
            upper_bound: upper,
            best_upper_bound: best_upper,
            cuts: cuts.len(),
            millis: started.elapsed().as_secs_f64() * 1e3,
        });
        if converged || gap_closed {
            trace.termination = Some(if converged { Termination::Converged } else { Termination::GapClosed });
            let (objective, x0, subs) = best.expect("at least one iteration evaluated");
            return Ok(finish(dec, objective, x0, subs, trace, cuts));
        }
    }
    trace.termination = Some(Termination::IterationLimit);
    Err(Error::IterationLimit {
        iterations: opts.max_iterations,
        trace: Box::new(trace),
    })
}

fn finish(
    dec: &BlockDecomposition,
    objective: f64,
    x0: Vec<f64>,
    subs: Vec<SubproblemResult>,
    mut trace: BendersTrace,
    cuts: Vec<Cut>,
) -> BendersSolution {
    let mut primal = x0;
    let mut warnings = Vec::new();
    for (k, (b, s)) in dec.blocks.iter().zip(&subs).enumerate() {
        debug_assert_eq!(primal.len(), b.offset);
        primal.extend_from_slice(&s.xk);
        trace.final_slack = trace.final_slack.max(s.max_slack);
        if s.max_slack > 1e-6 {
            warnings.push(format!(
                "scenario {k} needs slack {:.3e} at the reported point; the scenario may be infeasible",
                s.max_slack
            ));
        }
    }
    BendersSolution {
        primal,
        objective,
        trace,
        cuts,
        warnings,
    }
}
