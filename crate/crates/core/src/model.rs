//! Dispatch formulations (ED, P-SCED, C-SCED, R-SCED) assembled into one
//! LP layout, plus the CVaR evaluator.
//!
//! Variables are ordered `z, g, r̲, r̄` (the first stage) followed by one
//! contiguous `y_k, δg_k, δd_k` block per scenario. Rows are ordered
//! nominal balance, nominal flows, post-contingency (DA) flows, then one
//! contiguous block per scenario.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, verify_kkt, KktReport, LinearProgram, LpEngine, LpSolution, LpStatus};
use crate::network::{directed_limits, Network, ScenarioSet};

/// Residual bound every solve is certified against.
pub const KKT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ed,
    Psced,
    Csced,
    Rsced,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Ed => "ED",
            Variant::Psced => "P-SCED",
            Variant::Csced => "C-SCED",
            Variant::Rsced => "R-SCED",
        }
    }
}

/// Which post-contingency rating P-SCED enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ContingencyLimit {
    #[default]
    Nominal,
    Se,
    Da,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formulation {
    pub variant: Variant,
    pub alpha: f64,
    pub psced_limit: ContingencyLimit,
}

impl Formulation {
    pub fn new(variant: Variant) -> Self {
        Formulation {
            variant,
            alpha: 0.0,
            psced_limit: ContingencyLimit::default(),
        }
    }

    pub fn rsced(alpha: f64) -> Self {
        Formulation {
            alpha,
            ..Self::new(Variant::Rsced)
        }
    }
}

/// Positions of every named variable and constraint block in the flat LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableIndex {
    pub variant: Variant,
    pub n_buses: usize,
    pub n_scenarios: usize,
    pub z: Option<usize>,
    pub g: Range<usize>,
    pub r_down: Range<usize>,
    pub r_up: Range<usize>,
    /// Length of the first-stage prefix `z, g, r̲, r̄`.
    pub first_stage: usize,
    pub y: Vec<usize>,
    pub dg: Vec<Range<usize>>,
    pub dd: Vec<Range<usize>>,
    /// Variables of scenario `k`, contiguous.
    pub scenario_vars: Vec<Range<usize>>,

    /// Equality row `1ᵀ(g − d) = 0`.
    pub balance: usize,
    pub flow: Range<usize>,
    /// `H_k(g − d) ≤ f_k^DA`; P-SCED stores its post-contingency rows here.
    pub da: Vec<Range<usize>>,
    pub se_balance: Vec<usize>,
    pub se_flow: Vec<Range<usize>>,
    pub gen_up: Vec<Range<usize>>,
    pub gen_down: Vec<Range<usize>>,
    pub reserve_up: Vec<Range<usize>>,
    pub reserve_down: Vec<Range<usize>>,
    pub epigraph: Vec<usize>,
    /// Inequality rows of scenario `k`, contiguous.
    pub scenario_rows: Vec<Range<usize>>,
}

/// Sum that yields `+0.0` on empty input (`Iterator::sum` gives `-0.0`).
fn total(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |a, b| a + b)
}

fn span(start: usize, len: usize) -> Range<usize> {
    start..start + len
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

struct Builder<'a> {
    net: &'a Network,
    lp: LinearProgram,
    demand: Vec<f64>,
}

impl<'a> Builder<'a> {
    fn new(net: &'a Network) -> Self {
        Builder {
            net,
            lp: LinearProgram::new(),
            demand: net.demand(),
        }
    }

    /// Adds `H(x − d) ≤ limits` over the given variable blocks (all summed
    /// into the same injection). Returns the row range.
    fn flow_rows(
        &mut self,
        tag: &str,
        h: &nalgebra::DMatrix<f64>,
        limits: &[f64],
        blocks: &[Range<usize>],
        shift_demand: bool,
    ) -> Range<usize> {
        let l = self.net.n_lines();
        let start = self.lp.ineq_rows.len();
        for row in 0..2 * l {
            let line = row % l;
            let dir = if row < l { "fwd" } else { "rev" };
            let label = format!("{tag}[{}.{dir}]", self.net.lines[line].id);
            if !limits[row].is_finite() {
                self.lp.add_le(label, Vec::new(), f64::INFINITY);
                continue;
            }
            let mut coeffs = Vec::new();
            let mut hd = 0.0;
            for bus in 0..self.net.n_buses() {
                let a = h[(row, bus)];
                if a != 0.0 {
                    for b in blocks {
                        coeffs.push((b.start + bus, a));
                    }
                    hd += a * self.demand[bus];
                }
            }
            let rhs = limits[row] + if shift_demand { hd } else { 0.0 };
            self.lp.add_le(label, coeffs, rhs);
        }
        span(start, 2 * l)
    }
}

fn build(net: &Network, sc: &ScenarioSet, form: &Formulation) -> Result<(LinearProgram, VariableIndex)> {
    let variant = form.variant;
    let alpha = if variant == Variant::Rsced { form.alpha } else { 0.0 };
    check_alpha(alpha)?;
    let n = net.n_buses();
    let recourse = matches!(variant, Variant::Csced | Variant::Rsced);
    let contingent = variant != Variant::Ed;
    let k_count = if contingent { sc.len() } else { 0 };
    let rsced = variant == Variant::Rsced;

    let mut b = Builder::new(net);
    let cost = net.cost();
    let (gmin, gmax) = (net.gmin(), net.gmax());

    // First stage.
    let z = recourse.then(|| {
        let hi = if rsced { f64::INFINITY } else { 0.0 };
        b.lp.add_var("z", if rsced { 1.0 } else { 0.0 }, 0.0, hi)
    });
    let g = span(b.lp.n_vars(), n);
    for i in 0..n {
        b.lp.add_var(format!("g[{i}]"), cost[i], gmin[i], gmax[i]);
    }
    let r_start = b.lp.n_vars();
    if recourse {
        for (dir, side) in [("down", 0), ("up", 1)] {
            for (i, gen) in net.generators.iter().enumerate() {
                let (c, cap) = if side == 0 {
                    (gen.reserve_cost_down, gen.reserve_cap_down)
                } else {
                    (gen.reserve_cost_up, gen.reserve_cap_up)
                };
                // C-SCED holds reserves at their caps at no cost.
                let (c, lo) = if rsced { (c, 0.0) } else { (0.0, cap) };
                b.lp.add_var(format!("r_{dir}[{i}]"), c, lo, cap);
            }
        }
    }
    let r_down = span(r_start, if recourse { n } else { 0 });
    let r_up = span(r_down.end, if recourse { n } else { 0 });
    let first_stage = b.lp.n_vars();

    // Second stage.
    let probs = sc.probabilities();
    let voll = net.voll();
    let shed_cap = net.load_shed_cap();
    let (mut y, mut dg, mut dd, mut scenario_vars) = (vec![], vec![], vec![], vec![]);
    if recourse {
        for k in 0..k_count {
            let start = b.lp.n_vars();
            let weight = if rsced { probs[k] / (1.0 - alpha) } else { 0.0 };
            y.push(b.lp.add_var(format!("y[{k}]"), weight, 0.0, f64::INFINITY));
            dg.push(span(b.lp.n_vars(), n));
            for i in 0..n {
                b.lp.add_var(format!("dg[{k},{i}]"), 0.0, f64::NEG_INFINITY, f64::INFINITY);
            }
            dd.push(span(b.lp.n_vars(), n));
            for i in 0..n {
                let cap = if rsced { shed_cap[i] } else { 0.0 };
                b.lp.add_var(format!("dd[{k},{i}]"), 0.0, 0.0, cap);
            }
            scenario_vars.push(start..b.lp.n_vars());
        }
    }

    // Nominal rows.
    let total_demand: f64 = b.demand.iter().sum();
    let balance = b.lp.add_eq("balance", g.clone().map(|j| (j, 1.0)).collect(), total_demand);
    let flow = b.flow_rows("flow", &sc.nominal_isf, &directed_limits(net, 1.0), std::slice::from_ref(&g), true);
    let mut da = Vec::new();
    for k in 0..k_count {
        let limits = if variant == Variant::Psced {
            match form.psced_limit {
                ContingencyLimit::Nominal => sc.nominal_limits(net, k),
                ContingencyLimit::Se => sc.se_limits(net, k),
                ContingencyLimit::Da => sc.da_limits(net, k),
            }
        } else {
            sc.da_limits(net, k)
        };
        da.push(b.flow_rows(&format!("da[{k}]"), &sc.isf[k], &limits, std::slice::from_ref(&g), true));
    }

    // Scenario rows.
    let mut idx = VariableIndex {
        variant,
        n_buses: n,
        n_scenarios: k_count,
        z,
        g: g.clone(),
        r_down: r_down.clone(),
        r_up: r_up.clone(),
        first_stage,
        y: y.clone(),
        dg: dg.clone(),
        dd: dd.clone(),
        scenario_vars,
        balance,
        flow,
        da,
        se_balance: vec![],
        se_flow: vec![],
        gen_up: vec![],
        gen_down: vec![],
        reserve_up: vec![],
        reserve_down: vec![],
        epigraph: vec![],
        scenario_rows: vec![],
    };
    if recourse {
        for k in 0..k_count {
            let coeffs = dg[k].clone().chain(dd[k].clone()).map(|j| (j, 1.0)).collect();
            idx.se_balance.push(b.lp.add_eq(format!("se_balance[{k}]"), coeffs, 0.0));
            let start = b.lp.ineq_rows.len();
            let limits = sc.se_limits(net, k);
            idx.se_flow.push(b.flow_rows(
                &format!("se_flow[{k}]"),
                &sc.isf[k],
                &limits,
                &[g.clone(), dg[k].clone(), dd[k].clone()],
                true,
            ));
            let rows = |b: &mut Builder, tag: &str, f: &dyn Fn(usize) -> (Vec<(usize, f64)>, f64)| {
                let s = b.lp.ineq_rows.len();
                for i in 0..n {
                    let (coeffs, rhs) = f(i);
                    b.lp.add_le(format!("{tag}[{k},{i}]"), coeffs, rhs);
                }
                span(s, n)
            };
            let gk = dg[k].clone();
            idx.gen_up.push(rows(&mut b, "gen_up", &|i| {
                (vec![(g.start + i, 1.0), (gk.start + i, 1.0)], gmax[i])
            }));
            idx.gen_down.push(rows(&mut b, "gen_down", &|i| {
                (vec![(g.start + i, -1.0), (gk.start + i, -1.0)], -gmin[i])
            }));
            idx.reserve_up.push(rows(&mut b, "reserve_up", &|i| {
                (vec![(gk.start + i, 1.0), (r_up.start + i, -1.0)], 0.0)
            }));
            idx.reserve_down.push(rows(&mut b, "reserve_down", &|i| {
                (vec![(gk.start + i, -1.0), (r_down.start + i, -1.0)], 0.0)
            }));
            let mut coeffs: Vec<(usize, f64)> =
                dd[k].clone().zip(&voll).filter(|(_, &v)| v != 0.0).map(|(j, &v)| (j, v)).collect();
            coeffs.push((z.expect("recourse variants carry z"), -1.0));
            coeffs.push((y[k], -1.0));
            idx.epigraph.push(b.lp.add_le(format!("epigraph[{k}]"), coeffs, 0.0));
            idx.scenario_rows.push(start..b.lp.ineq_rows.len());
        }
    }
    Ok((b.lp, idx))
}

/// Economic dispatch: balance, nominal flow limits and generator bounds.
pub fn build_ed(network: &Network) -> Result<(LinearProgram, VariableIndex)> {
    build(network, &ScenarioSet::empty(network)?, &Formulation::new(Variant::Ed))
}

/// Preventive SCED: the nominal dispatch must respect `limit` after every contingency.
pub fn build_psced(
    network: &Network,
    scenarios: &ScenarioSet,
    limit: ContingencyLimit,
) -> Result<(LinearProgram, VariableIndex)> {
    let form = Formulation {
        psced_limit: limit,
        ..Formulation::new(Variant::Psced)
    };
    build(network, scenarios, &form)
}

/// Corrective SCED: free redispatch within the reserve caps, no load shed.
/// Uses the R-SCED layout with `r` fixed at the caps, `δd = 0` and `z = 0`.
pub fn build_csced(network: &Network, scenarios: &ScenarioSet) -> Result<(LinearProgram, VariableIndex)> {
    build(network, scenarios, &Formulation::new(Variant::Csced))
}

/// Risk-sensitive SCED with a CVaR_α load-shed term in epigraph form and `z ≥ 0`.
pub fn build_rsced(
    network: &Network,
    scenarios: &ScenarioSet,
    alpha: f64,
) -> Result<(LinearProgram, VariableIndex)> {
    build(network, scenarios, &Formulation::rsced(alpha))
}

pub fn build_formulation(
    network: &Network,
    scenarios: &ScenarioSet,
    form: &Formulation,
) -> Result<(LinearProgram, VariableIndex)> {
    build(network, scenarios, form)
}

/// Multipliers mapped back to their constraint names. Scenario-indexed
/// fields are empty for ED; P-SCED fills `mu_da` only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub gamma_lo: Vec<f64>,
    pub gamma_hi: Vec<f64>,
    pub mu_da: Vec<Vec<f64>>,
    pub mu_se: Vec<Vec<f64>>,
    pub lambda_k: Vec<f64>,
    pub gamma_lo_k: Vec<Vec<f64>>,
    pub gamma_hi_k: Vec<Vec<f64>>,
    pub rho_lo_k: Vec<Vec<f64>>,
    pub rho_hi_k: Vec<Vec<f64>>,
    /// Multipliers of `r̲ ≥ 0` and `r̄ ≥ 0`.
    pub eta_lo: Vec<f64>,
    pub eta_hi: Vec<f64>,
    /// Multipliers of the reserve procurement caps `r̲ ≤ cap`, `r̄ ≤ cap`.
    pub reserve_cap_lo: Vec<f64>,
    pub reserve_cap_hi: Vec<f64>,
    pub sigma_lo_k: Vec<Vec<f64>>,
    pub sigma_hi_k: Vec<Vec<f64>>,
    pub nu_lo_k: Vec<f64>,
    pub nu_hi_k: Vec<f64>,
    /// Multiplier of `z ≥ 0`.
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// `cᵀg`
    pub nominal: f64,
    /// `c̲_rᵀr̲ + c̄_rᵀr̄` as charged in the objective (zero for C-SCED).
    pub reserve: f64,
    /// `z + (1/(1−α)) Σ p_k y_k`
    pub cvar_term: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub variant: Variant,
    pub alpha: f64,
    pub z: f64,
    pub y: Vec<f64>,
    pub g: Vec<f64>,
    pub r_down: Vec<f64>,
    pub r_up: Vec<f64>,
    pub dg: Vec<Vec<f64>>,
    pub dd: Vec<Vec<f64>>,
    pub duals: Duals,
    pub costs: CostBreakdown,
    /// Absent when the point came from decomposition rather than one LP solve.
    pub kkt: Option<KktReport>,
    pub iterations: usize,
}

impl DispatchSolution {
    /// `Σ_k 1ᵀδd_k`, MW summed over scenarios.
    pub fn total_shed(&self) -> f64 {
        total(self.dd.iter().flatten().copied())
    }

    pub fn scenario_shed(&self) -> Vec<f64> {
        self.dd.iter().map(|d| total(d.iter().copied())).collect()
    }

    /// Probability-weighted shed, MW.
    pub fn expected_shed(&self, probabilities: &[f64]) -> f64 {
        total(self.scenario_shed().iter().zip(probabilities).map(|(s, p)| s * p))
    }

    pub fn max_shed(&self) -> f64 {
        self.scenario_shed().into_iter().fold(0.0, f64::max)
    }
}

fn pick(v: &[f64], r: &Range<usize>) -> Vec<f64> {
    v[r.clone()].to_vec()
}

/// Maps a flat LP solution back to named fields. Does not re-check status.
pub fn unflatten(lp: &LinearProgram, idx: &VariableIndex, sol: &LpSolution, alpha: f64) -> DispatchSolution {
    let x = &sol.primal;
    let dot = |r: Range<usize>| total(r.map(|j| lp.objective[j] * x[j]));
    let nominal = dot(idx.g.clone());
    let reserve = dot(idx.r_down.start..idx.r_up.end);
    let cvar_term = idx.z.map_or(0.0, |j| lp.objective[j] * x[j]) + total(idx.y.iter().map(|&j| lp.objective[j] * x[j]));
    let (ineq, lo, hi) = (&sol.dual_ineq, &sol.dual_lower, &sol.dual_upper);
    let per_k = |rows: &[Range<usize>]| rows.iter().map(|r| pick(ineq, r)).collect::<Vec<_>>();
    let duals = Duals {
        lambda: sol.dual_eq[idx.balance],
        mu: pick(ineq, &idx.flow),
        gamma_lo: pick(lo, &idx.g),
        gamma_hi: pick(hi, &idx.g),
        mu_da: per_k(&idx.da),
        mu_se: per_k(&idx.se_flow),
        lambda_k: idx.se_balance.iter().map(|&i| sol.dual_eq[i]).collect(),
        gamma_lo_k: per_k(&idx.gen_down),
        gamma_hi_k: per_k(&idx.gen_up),
        rho_lo_k: per_k(&idx.reserve_down),
        rho_hi_k: per_k(&idx.reserve_up),
        eta_lo: pick(lo, &idx.r_down),
        eta_hi: pick(lo, &idx.r_up),
        reserve_cap_lo: pick(hi, &idx.r_down),
        reserve_cap_hi: pick(hi, &idx.r_up),
        sigma_lo_k: idx.dd.iter().map(|r| pick(lo, r)).collect(),
        sigma_hi_k: idx.dd.iter().map(|r| pick(hi, r)).collect(),
        nu_lo_k: idx.y.iter().map(|&j| lo[j]).collect(),
        nu_hi_k: idx.epigraph.iter().map(|&i| ineq[i]).collect(),
        zeta: idx.z.map_or(0.0, |j| lo[j]),
    };
    DispatchSolution {
        variant: idx.variant,
        alpha,
        z: idx.z.map_or(0.0, |j| x[j]),
        y: idx.y.iter().map(|&j| x[j]).collect(),
        g: pick(x, &idx.g),
        r_down: pick(x, &idx.r_down),
        r_up: pick(x, &idx.r_up),
        dg: idx.dg.iter().map(|r| pick(x, r)).collect(),
        dd: idx.dd.iter().map(|r| pick(x, r)).collect(),
        duals,
        costs: CostBreakdown {
            nominal,
            reserve,
            cvar_term,
            total: sol.objective,
        },
        kkt: Some(verify_kkt(lp, sol, KKT_TOLERANCE)),
        iterations: sol.iterations,
    }
}

/// Named primal fields for a point `x` of the flat LP; duals are left
/// empty and no KKT report is attached.
pub fn from_primal(lp: &LinearProgram, idx: &VariableIndex, x: &[f64], alpha: f64) -> DispatchSolution {
    let m_eq = lp.eq_rows.len();
    let m_in = lp.ineq_rows.len();
    let n = lp.n_vars();
    let sol = LpSolution {
        status: LpStatus::Optimal,
        primal: x.to_vec(),
        objective: lp.objective_value(x),
        dual_eq: vec![0.0; m_eq],
        dual_ineq: vec![0.0; m_in],
        dual_lower: vec![0.0; n],
        dual_upper: vec![0.0; n],
        certificate: None,
        iterations: 0,
    };
    let mut out = unflatten(lp, idx, &sol, alpha);
    out.duals = Duals::default();
    out.kkt = None;
    out
}

pub fn solve_dispatch_with(
    engine: &dyn LpEngine,
    lp: &LinearProgram,
    idx: &VariableIndex,
    alpha: f64,
) -> Result<DispatchSolution> {
    let sol = engine.solve(lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(unflatten(lp, idx, &sol, alpha)),
        LpStatus::Infeasible => Err(Error::Infeasible(idx.variant.name().into())),
        LpStatus::Unbounded => Err(Error::Unbounded(idx.variant.name().into())),
    }
}

/// Solves with the built-in simplex and attaches a KKT report.
pub fn solve_dispatch(lp: &LinearProgram, idx: &VariableIndex, alpha: f64) -> Result<DispatchSolution> {
    solve_dispatch_with(&lp::DenseSimplex::default(), lp, idx, alpha)
}

/// Build and solve in one step.
pub fn solve_formulation(network: &Network, scenarios: &ScenarioSet, form: &Formulation) -> Result<DispatchSolution> {
    let (lp, idx) = build(network, scenarios, form)?;
    let alpha = if form.variant == Variant::Rsced { form.alpha } else { 0.0 };
    solve_dispatch(&lp, &idx, alpha)
}

/// Discrete load-shed cost distribution, `(cost $/h, probability)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadShedDistribution {
    pub outcomes: Vec<(f64, f64)>,
}

impl LoadShedDistribution {
    pub fn new(outcomes: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = outcomes.iter().map(|o| o.1).sum();
        if outcomes.iter().any(|&(c, p)| !(c >= 0.0) || !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidContingency(format!(
                "load-shed distribution must have nonnegative costs and probabilities summing to 1 (got {total})"
            )));
        }
        Ok(LoadShedDistribution { outcomes })
    }

    pub fn expectation(&self) -> f64 {
        self.outcomes.iter().map(|(c, p)| c * p).sum()
    }

    pub fn max(&self) -> f64 {
        self.outcomes.iter().filter(|o| o.1 > 0.0).map(|o| o.0).fold(0.0, f64::max)
    }
}

/// `min_z z + E[ξ − z]⁺ / (1 − α)`. The minimiser is an outcome value,
/// so scanning the outcomes is exact. At `α = 0` this is the expectation.
pub fn cvar(alpha: f64, dist: &LoadShedDistribution) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(dist.expectation());
    }
    let scale = 1.0 / (1.0 - alpha);
    let value = |z: f64| z + scale * dist.outcomes.iter().map(|&(c, p)| p * (c - z).max(0.0)).sum::<f64>();
    Ok(dist.outcomes.iter().map(|o| value(o.0)).fold(f64::INFINITY, f64::min))
}

/// Outcome `k` is `(vᵀδd_k, p_k)`; the nominal atom `(0, 1 − Σp_k)` comes last.
pub fn shed_distribution(solution: &DispatchSolution, network: &Network, scenarios: &ScenarioSet) -> LoadShedDistribution {
    let voll = network.voll();
    let probs = scenarios.probabilities();
    let mut outcomes: Vec<(f64, f64)> = solution
        .dd
        .iter()
        .zip(&probs)
        .map(|(dd, &p)| (dd.iter().zip(&voll).map(|(d, v)| d * v).sum::<f64>().max(0.0), p))
        .collect();
    outcomes.push((0.0, 1.0 - probs.iter().sum::<f64>()));
    LoadShedDistribution { outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(o: &[(f64, f64)]) -> LoadShedDistribution {
        LoadShedDistribution::new(o.to_vec()).unwrap()
    }

    #[test]
    fn cvar_zero_alpha_is_expectation() {
        assert_eq!(cvar(0.0, &dist(&[(930.0, 0.1), (0.0, 0.9)])).unwrap(), 93.0);
    }

    #[test]
    fn cvar_high_alpha_is_worst_case() {
        let v = cvar(0.95, &dist(&[(930.0, 0.1), (0.0, 0.9)])).unwrap();
        assert!((v - 930.0).abs() < 1e-9);
    }

    #[test]
    fn cvar_half() {
        let v = cvar(0.5, &dist(&[(100.0, 0.25), (200.0, 0.25), (0.0, 0.5)])).unwrap();
        assert!((v - 150.0).abs() < 1e-9);
    }

    #[test]
    fn cvar_rejects_bad_alpha() {
        let d = dist(&[(1.0, 1.0)]);
        assert!(matches!(cvar(1.0, &d), Err(Error::InvalidAlpha(_))));
        assert!(matches!(cvar(-0.1, &d), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn distribution_validation() {
        assert!(LoadShedDistribution::new(vec![(1.0, 0.5)]).is_err());
        assert!(LoadShedDistribution::new(vec![(-1.0, 1.0)]).is_err());
    }
}
