//! Dense two-phase revised simplex over bounded variables.
//!
//! The basis inverse is kept explicitly (column-major) and updated with
//! elementary row operations after each pivot. It is rebuilt from scratch
//! every `refactor_every` pivots by exploiting that most basic columns are
//! unit slack/artificial columns: only the structural block needs a dense LU.
//!
//! Pricing is Dantzig's rule with a Harris ratio test. After a run of
//! degenerate pivots the solver switches to Bland's rule (smallest index on
//! both entering and leaving choice) until progress resumes, which rules out
//! cycling.

use nalgebra::DMatrix;

use super::{LinearProgram, LpEngine, LpSolution, LpStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Absolute primal feasibility tolerance.
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance, scaled by `1 + |c_j|`.
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// `None` picks `50 (m + n) + 10_000`.
    pub max_iterations: Option<usize>,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
    /// Upper bound on the 1-norm condition estimate of the basis.
    pub max_condition: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            optimality_tol: 1e-8,
            pivot_tol: 1e-9,
            max_iterations: None,
            refactor_every: 100,
            degenerate_switch: 50,
            max_condition: 1e15,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DenseSimplex {
    pub options: SimplexOptions,
}

impl DenseSimplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }
}

impl LpEngine for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution> {
        lp.validate()?;
        let mut tab = Simplex::build(lp, self.options);
        tab.run(lp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Simplex {
    opts: SimplexOptions,
    m: usize,
    n_struct: usize,
    /// sparse columns over internal rows
    cols: Vec<Vec<(usize, f64)>>,
    kind: Vec<Kind>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    rhs: Vec<f64>,
    /// column basic in each row position
    basis: Vec<usize>,
    /// basis position of each column, `usize::MAX` when nonbasic
    pos: Vec<usize>,
    /// column-major `m × m`
    binv: Vec<f64>,
    /// internal row -> (is_eq, original index)
    row_origin: Vec<(bool, usize)>,
    /// factor each internal row was multiplied by
    row_scale: Vec<f64>,
    /// slack column of each internal row
    slack_of_row: Vec<Option<usize>>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

const NONBASIC: usize = usize::MAX;

enum Step {
    Optimal,
    Unbounded(Vec<f64>),
    Progress,
}

impl Simplex {
    fn build(lp: &LinearProgram, opts: SimplexOptions) -> Self {
        let n = lp.n_vars();
        let mut row_origin = Vec::new();
        let mut rhs = Vec::new();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.eq_rows.iter().enumerate() {
            let r = row_origin.len();
            row_origin.push((true, i));
            rhs.push(row.rhs);
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((r, a));
                }
            }
        }
        for (i, row) in lp.ineq_rows.iter().enumerate() {
            if row.rhs == f64::INFINITY {
                continue;
            }
            let r = row_origin.len();
            row_origin.push((false, i));
            rhs.push(row.rhs);
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((r, a));
                }
            }
        }
        // merge duplicate entries within a column
        for col in cols.iter_mut() {
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|&(_, a)| a != 0.0);
        }
        let m = row_origin.len();
        // Equilibrate rows to unit max-norm; multipliers are unscaled on extraction.
        let mut row_scale = vec![0.0f64; m];
        for col in &cols {
            for &(r, a) in col {
                row_scale[r] = row_scale[r].max(a.abs());
            }
        }
        for s in row_scale.iter_mut() {
            *s = if *s > 0.0 { 1.0 / *s } else { 1.0 };
        }
        for col in cols.iter_mut() {
            for e in col.iter_mut() {
                e.1 *= row_scale[e.0];
            }
        }
        for (b, s) in rhs.iter_mut().zip(&row_scale) {
            *b *= s;
        }
        let mut kind = vec![Kind::Structural; n];
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        let mut slack_of_row = vec![None; m];
        for (r, &(is_eq, _)) in row_origin.iter().enumerate() {
            if !is_eq {
                slack_of_row[r] = Some(cols.len());
                cols.push(vec![(r, 1.0)]);
                kind.push(Kind::Slack);
                lo.push(0.0);
                hi.push(f64::INFINITY);
            }
        }
        let total = cols.len();
        let x: Vec<f64> = (0..total).map(|j| nonbasic_value(lo[j], hi[j])).collect();
        Self {
            opts,
            m,
            n_struct: n,
            cols,
            kind,
            lo,
            hi,
            x,
            rhs,
            basis: Vec::new(),
            pos: vec![NONBASIC; total],
            binv: Vec::new(),
            row_origin,
            row_scale,
            slack_of_row,
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn max_iterations(&self) -> usize {
        self.opts
            .max_iterations
            .unwrap_or(50 * (self.m + self.cols.len()) + 10_000)
    }

    fn run(&mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let m = self.m;
        // crash basis: slacks where the residual allows, artificials elsewhere
        let mut residual = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.x[j] != 0.0 {
                for &(r, a) in &self.cols[j] {
                    residual[r] -= a * self.x[j];
                }
            }
        }
        self.basis = vec![NONBASIC; m];
        let mut needs_phase1 = false;
        for r in 0..m {
            match self.slack_of_row[r] {
                Some(s) if residual[r] >= 0.0 => {
                    self.basis[r] = s;
                    self.pos[s] = r;
                    self.x[s] = residual[r];
                }
                _ => {
                    let sign = if residual[r] >= 0.0 { 1.0 } else { -1.0 };
                    let a = self.cols.len();
                    self.cols.push(vec![(r, sign)]);
                    self.kind.push(Kind::Artificial);
                    self.lo.push(0.0);
                    self.hi.push(f64::INFINITY);
                    self.x.push(residual[r].abs());
                    self.pos.push(r);
                    self.basis[r] = a;
                    needs_phase1 = true;
                }
            }
        }
        self.refactor()?;

        if needs_phase1 {
            let cost: Vec<f64> = self
                .kind
                .iter()
                .map(|k| if *k == Kind::Artificial { 1.0 } else { 0.0 })
                .collect();
            if let Step::Unbounded(_) = self.optimize(&cost)? {
                return Err(Error::NumericalFailure("phase 1 reported unbounded".into()));
            }
            let infeas: f64 = (0..self.cols.len())
                .filter(|&j| self.kind[j] == Kind::Artificial)
                .map(|j| self.x[j].abs())
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > self.opts.feasibility_tol * scale * 10.0 {
                let y = self.duals(&cost);
                let certificate = self.to_user_rows(lp, &y);
                return Ok(self.non_optimal(lp, LpStatus::Infeasible, Some(certificate)));
            }
            for j in 0..self.cols.len() {
                if self.kind[j] == Kind::Artificial {
                    self.hi[j] = 0.0;
                    if self.pos[j] == NONBASIC {
                        self.x[j] = 0.0;
                    }
                }
            }
            self.drive_out_artificials()?;
        }

        let mut cost = lp.objective.clone();
        cost.resize(self.cols.len(), 0.0);
        self.bland = false;
        self.degenerate_run = 0;
        if let Step::Unbounded(ray) = self.optimize(&cost)? {
            return Ok(self.non_optimal(lp, LpStatus::Unbounded, Some(ray)));
        }
        self.refactor()?;
        Ok(self.extract(lp, &cost))
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<Step> {
        let limit = self.max_iterations();
        loop {
            if self.iterations >= limit {
                return Err(Error::CyclingDetected(self.iterations));
            }
            match self.iterate(cost)? {
                Step::Progress => {}
                other => return Ok(other),
            }
        }
    }

    /// `y = c_Bᵀ B⁻¹`
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<(usize, f64)> = self
            .basis
            .iter()
            .enumerate()
            .filter_map(|(i, &j)| (cost[j] != 0.0).then_some((i, cost[j])))
            .collect();
        (0..m)
            .map(|col| {
                let c = &self.binv[col * m..(col + 1) * m];
                cb.iter().map(|&(i, v)| v * c[i]).sum()
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(r, a)| a * y[r]).sum::<f64>()
    }

    /// `B⁻¹ a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            let c = &self.binv[r * m..(r + 1) * m];
            for (dst, v) in alpha.iter_mut().zip(c) {
                *dst += a * v;
            }
        }
        alpha
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<Step> {
        let y = self.duals(cost);
        // pricing
        let mut entering: Option<(usize, f64, f64)> = None; // (col, dir, |d|)
        for j in 0..self.cols.len() {
            if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j, cost, &y);
            let tol = self.opts.optimality_tol * (1.0 + cost[j].abs());
            let at_lo = self.lo[j].is_finite() && self.x[j] <= self.lo[j];
            let at_hi = self.hi[j].is_finite() && self.x[j] >= self.hi[j];
            let dir = if d < -tol && !at_hi {
                1.0
            } else if d > tol && !at_lo {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                entering = Some((j, dir, d.abs()));
                break;
            }
            if entering.is_none_or(|(_, _, best)| d.abs() > best) {
                entering = Some((j, dir, d.abs()));
            }
        }
        let Some((q, dir, _)) = entering else {
            return Ok(Step::Optimal);
        };

        let alpha = self.ftran(q);
        // ratio test: basic i moves by -dir * alpha_i * t
        let bound_gap = self.hi[q] - self.lo[q];
        let mut t_max = if bound_gap.is_finite() { bound_gap } else { f64::INFINITY };
        let limit = |i: usize, slack_tol: f64| -> Option<f64> {
            let a = dir * alpha[i];
            if a.abs() <= self.opts.pivot_tol {
                return None;
            }
            let b = self.basis[i];
            if a > 0.0 {
                self.lo[b]
                    .is_finite()
                    .then(|| (self.x[b] - self.lo[b] + slack_tol) / a)
            } else {
                self.hi[b]
                    .is_finite()
                    .then(|| (self.hi[b] - self.x[b] + slack_tol) / -a)
            }
        };
        let mut leaving: Option<usize> = None;
        if self.bland {
            let mut best = f64::INFINITY;
            for i in 0..self.m {
                if let Some(t) = limit(i, 0.0) {
                    let t = t.max(0.0);
                    let better = match leaving {
                        None => t < best,
                        Some(l) => {
                            t < best - 1e-12
                                || (t <= best + 1e-12 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best = t;
                        leaving = Some(i);
                    }
                }
            }
            if leaving.is_some() && best < t_max {
                t_max = best;
            } else {
                leaving = None;
            }
        } else {
            // Harris pass 1: relaxed bound
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m {
                if let Some(t) = limit(i, self.opts.feasibility_tol) {
                    relaxed = relaxed.min(t);
                }
            }
            if relaxed < t_max {
                // pass 2: largest pivot among candidates within the relaxed step
                let mut best_abs = 0.0;
                for i in 0..self.m {
                    if let Some(t) = limit(i, 0.0) {
                        if t <= relaxed && alpha[i].abs() > best_abs {
                            best_abs = alpha[i].abs();
                            leaving = Some(i);
                        }
                    }
                }
                if let Some(r) = leaving {
                    t_max = limit(r, 0.0).unwrap().max(0.0);
                }
            }
        }

        if t_max == f64::INFINITY {
            let mut ray = vec![0.0; self.n_struct];
            if q < self.n_struct {
                ray[q] = dir;
            }
            for (i, &b) in self.basis.iter().enumerate() {
                if b < self.n_struct {
                    ray[b] = -dir * alpha[i];
                }
            }
            return Ok(Step::Unbounded(ray));
        }

        self.iterations += 1;
        let t = t_max;
        if t <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run >= self.opts.degenerate_switch {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }

        self.x[q] += dir * t;
        for i in 0..self.m {
            if alpha[i] != 0.0 {
                let b = self.basis[i];
                self.x[b] -= dir * t * alpha[i];
            }
        }

        match leaving {
            None => {
                // bound flip
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
            }
            Some(r) => {
                let out = self.basis[r];
                let a = dir * alpha[r];
                self.x[out] = if a > 0.0 { self.lo[out] } else { self.hi[out] };
                self.pivot(r, q, &alpha)?;
            }
        }
        Ok(Step::Progress)
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) -> Result<()> {
        let m = self.m;
        let piv = alpha[r];
        if piv.abs() <= self.opts.pivot_tol {
            return Err(Error::NumericalFailure(format!("pivot element {piv:e} too small")));
        }
        let out = self.basis[r];
        self.pos[out] = NONBASIC;
        self.basis[r] = q;
        self.pos[q] = r;
        let nz: Vec<usize> = (0..m).filter(|&i| i != r && alpha[i] != 0.0).collect();
        for col in 0..m {
            let c = &mut self.binv[col * m..(col + 1) * m];
            let v = c[r];
            if v == 0.0 {
                continue;
            }
            let v = v / piv;
            c[r] = v;
            for &i in &nz {
                c[i] -= alpha[i] * v;
            }
        }
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every {
            self.refactor()?;
        }
        Ok(())
    }

    /// Rebuilds `B⁻¹` and recomputes basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        let mut covered: Vec<Option<(usize, f64)>> = vec![None; m]; // row -> (basis pos, sign)
        let mut structural: Vec<usize> = Vec::new(); // basis positions
        for (p, &j) in self.basis.iter().enumerate() {
            if self.kind[j] == Kind::Structural {
                structural.push(p);
            } else {
                let (r, s) = self.cols[j][0];
                if covered[r].is_some() {
                    return Err(Error::NumericalFailure("basis repeats a unit column".into()));
                }
                covered[r] = Some((p, s));
            }
        }
        let t_rows: Vec<usize> = (0..m).filter(|&r| covered[r].is_none()).collect();
        if t_rows.len() != structural.len() {
            return Err(Error::NumericalFailure("basis is singular".into()));
        }
        let k = t_rows.len();
        let mut t_index = vec![usize::MAX; m];
        for (i, &r) in t_rows.iter().enumerate() {
            t_index[r] = i;
        }
        let mut binv = vec![0.0; m * m];
        if k > 0 {
            let mut at = DMatrix::<f64>::zeros(k, k);
            for (c, &p) in structural.iter().enumerate() {
                for &(r, a) in &self.cols[self.basis[p]] {
                    if t_index[r] != usize::MAX {
                        at[(t_index[r], c)] = a;
                    }
                }
            }
            let norm_at = column_norm1(&at);
            let inv = at
                .lu()
                .try_inverse()
                .ok_or_else(|| Error::NumericalFailure("basis is singular".into()))?;
            let cond = norm_at * column_norm1(&inv);
            if !cond.is_finite() || cond > self.opts.max_condition {
                return Err(Error::NumericalFailure(format!(
                    "basis condition estimate {cond:e} exceeds limit"
                )));
            }
            // columns of B⁻¹ for T rows
            for (ti, &row) in t_rows.iter().enumerate() {
                let col = &mut binv[row * m..(row + 1) * m];
                let mut s_acc = vec![0.0; m];
                for (c, &p) in structural.iter().enumerate() {
                    let xc = inv[(c, ti)];
                    if xc == 0.0 {
                        continue;
                    }
                    col[p] = xc;
                    for &(r, a) in &self.cols[self.basis[p]] {
                        if covered[r].is_some() {
                            s_acc[r] += a * xc;
                        }
                    }
                }
                for r in 0..m {
                    if let Some((p, s)) = covered[r] {
                        if s_acc[r] != 0.0 {
                            col[p] = -s_acc[r] / s;
                        }
                    }
                }
            }
        }
        for r in 0..m {
            if let Some((p, s)) = covered[r] {
                binv[r * m + p] = 1.0 / s;
            }
        }
        self.binv = binv;

        // x_B = B⁻¹ (b − N x_N)
        let mut residual = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                for &(r, a) in &self.cols[j] {
                    residual[r] -= a * self.x[j];
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (r, &v) in residual.iter().enumerate() {
            if v != 0.0 {
                let c = &self.binv[r * m..(r + 1) * m];
                for (dst, b) in xb.iter_mut().zip(c) {
                    *dst += v * b;
                }
            }
        }
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
        Ok(())
    }

    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            let j = self.basis[r];
            if self.kind[j] != Kind::Artificial {
                continue;
            }
            let row: Vec<f64> = (0..m).map(|c| self.binv[c * m + r]).collect();
            let mut best: Option<(usize, f64)> = None;
            for q in 0..self.cols.len() {
                if self.pos[q] != NONBASIC || self.kind[q] == Kind::Artificial {
                    continue;
                }
                let v: f64 = self.cols[q].iter().map(|&(i, a)| a * row[i]).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((q, v));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.ftran(q);
                self.x[j] = 0.0;
                self.pivot(r, q, &alpha)?;
            }
        }
        self.refactor()
    }

    fn to_user_rows(&self, lp: &LinearProgram, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; lp.eq_rows.len() + lp.ineq_rows.len()];
        for (r, &(is_eq, i)) in self.row_origin.iter().enumerate() {
            let idx = if is_eq { i } else { lp.eq_rows.len() + i };
            out[idx] = y[r] * self.row_scale[r];
        }
        out
    }

    fn non_optimal(&self, lp: &LinearProgram, status: LpStatus, certificate: Option<Vec<f64>>) -> LpSolution {
        LpSolution {
            status,
            primal: self.x[..self.n_struct].to_vec(),
            objective: match status {
                LpStatus::Infeasible => f64::INFINITY,
                _ => f64::NEG_INFINITY,
            },
            dual_eq: vec![0.0; lp.eq_rows.len()],
            dual_ineq: vec![0.0; lp.ineq_rows.len()],
            dual_lower: vec![0.0; self.n_struct],
            dual_upper: vec![0.0; self.n_struct],
            certificate,
            iterations: self.iterations,
        }
    }

    fn extract(&self, lp: &LinearProgram, cost: &[f64]) -> LpSolution {
        let y = self.duals(cost);
        let n = self.n_struct;
        let primal = self.x[..n].to_vec();
        let mut dual_lower = vec![0.0; n];
        let mut dual_upper = vec![0.0; n];
        for j in 0..n {
            if self.pos[j] != NONBASIC {
                continue;
            }
            let d = self.reduced_cost(j, cost, &y);
            let at_lo = self.lo[j].is_finite() && self.x[j] <= self.lo[j];
            let at_hi = self.hi[j].is_finite() && self.x[j] >= self.hi[j];
            if at_lo && (d >= 0.0 || !at_hi) {
                dual_lower[j] = d.max(0.0);
            } else if at_hi {
                dual_upper[j] = (-d).max(0.0);
            }
        }
        let mut dual_eq = vec![0.0; lp.eq_rows.len()];
        let mut dual_ineq = vec![0.0; lp.ineq_rows.len()];
        for (r, &(is_eq, i)) in self.row_origin.iter().enumerate() {
            let yr = y[r] * self.row_scale[r];
            if is_eq {
                dual_eq[i] = yr;
            } else {
                let s = self.slack_of_row[r].unwrap();
                dual_ineq[i] = if self.pos[s] != NONBASIC { 0.0 } else { (-yr).max(0.0) };
            }
        }
        LpSolution {
            status: LpStatus::Optimal,
            objective: lp.objective_value(&primal),
            primal,
            dual_eq,
            dual_ineq,
            dual_lower,
            dual_upper,
            certificate: None,
            iterations: self.iterations,
        }
    }
}

fn nonbasic_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

fn column_norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
