//! Brute-force LP oracle: enumerate every basic solution of a boxed LP.
//!
//! Shared between the library's unit tests and the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinearProgram;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random LP with every variable boxed, `n_rows` inequalities and at most
/// one equality. Roughly one in ten instances is infeasible.
pub fn random_lp(rng: &mut ChaCha8Rng, n_vars: usize, n_rows: usize) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for j in 0..n_vars {
        let lo = rng.gen_range(-5.0..0.0f64).round();
        let hi = lo + rng.gen_range(1.0..8.0f64).round();
        lp.add_var(format!("x{j}"), rng.gen_range(-3.0..3.0f64), lo, hi);
    }
    let anchor: Vec<f64> = (0..n_vars)
        .map(|j| rng.gen_range(lp.lower[j]..=lp.upper[j]))
        .collect();
    let infeasible = rng.gen_bool(0.1);
    for i in 0..n_rows {
        let mut coeffs = Vec::new();
        for j in 0..n_vars {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-2.0..2.0f64)));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * anchor[j]).sum();
        let rhs = if infeasible && i == 0 {
            act - 50.0 - coeffs.iter().map(|&(_, a)| a.abs() * 10.0).sum::<f64>()
        } else {
            act + rng.gen_range(0.0..3.0)
        };
        lp.add_le(format!("r{i}"), coeffs, rhs);
    }
    if n_vars > 1 && rng.gen_bool(0.3) {
        let coeffs: Vec<(usize, f64)> = (0..n_vars).map(|j| (j, rng.gen_range(-1.0..1.0f64))).collect();
        let act: f64 = coeffs.iter().map(|&(j, a)| a * anchor[j]).sum();
        lp.add_eq("e0", coeffs, act);
    }
    lp
}

enum Active {
    Eq(usize),
    Ineq(usize),
    Lower(usize),
    Upper(usize),
}

/// Minimum objective over all vertices, or `None` if no vertex is feasible.
/// Requires every variable to have finite bounds.
pub fn enumerate_vertices(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    assert!(lp.lower.iter().chain(&lp.upper).all(|v| v.is_finite()));
    let mut candidates = Vec::new();
    for i in 0..lp.ineq_rows.len() {
        if lp.ineq_rows[i].rhs.is_finite() {
            candidates.push(Active::Ineq(i));
        }
    }
    for j in 0..n {
        candidates.push(Active::Lower(j));
        candidates.push(Active::Upper(j));
    }
    let fixed: Vec<Active> = (0..lp.eq_rows.len()).map(Active::Eq).collect();
    let need = n.saturating_sub(fixed.len());
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(need);
    visit(lp, &candidates, &fixed, need, 0, &mut chosen, &mut best);
    best
}

fn visit(
    lp: &LinearProgram,
    cands: &[Active],
    fixed: &[Active],
    need: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    best: &mut Option<f64>,
) {
    if chosen.len() == need {
        let active: Vec<&Active> = fixed.iter().chain(chosen.iter().map(|&i| &cands[i])).collect();
        if let Some(x) = solve_active(lp, &active) {
            if feasible(lp, &x) {
                let v = lp.objective_value(&x);
                if best.is_none_or(|b| v < b) {
                    *best = Some(v);
                }
            }
        }
        return;
    }
    for i in start..cands.len() {
        if cands.len() - i < need - chosen.len() {
            break;
        }
        chosen.push(i);
        visit(lp, cands, fixed, need, i + 1, chosen, best);
        chosen.pop();
    }
}

fn solve_active(lp: &LinearProgram, active: &[&Active]) -> Option<Vec<f64>> {
    let n = lp.n_vars();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (r, act) in active.iter().enumerate() {
        match act {
            Active::Eq(i) | Active::Ineq(i) => {
                let row = match act {
                    Active::Eq(_) => &lp.eq_rows[*i],
                    _ => &lp.ineq_rows[*i],
                };
                for &(j, v) in &row.coeffs {
                    a[r][j] += v;
                }
                a[r][n] = row.rhs;
            }
            Active::Lower(j) => {
                a[r][*j] = 1.0;
                a[r][n] = lp.lower[*j];
            }
            Active::Upper(j) => {
                a[r][*j] = 1.0;
                a[r][n] = lp.upper[*j];
            }
        }
    }
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        for r in 0..n {
            if r != c && a[r][c] != 0.0 {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|r| a[r][n] / a[r][r]).collect())
}

fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let tol = 1e-9;
    (0..lp.n_vars()).all(|j| x[j] >= lp.lower[j] - tol && x[j] <= lp.upper[j] + tol)
        && lp.ineq_rows.iter().all(|r| r.activity(x) <= r.rhs + tol)
        && lp.eq_rows.iter().all(|r| (r.activity(x) - r.rhs).abs() <= tol)
}
