//! Nodal prices from dispatch multipliers and the resulting settlement:
//! payments, merchandising surplus, lost-opportunity-cost (LOC) uplift and
//! the revenue-adequacy checks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DispatchSolution, Variant};
use crate::network::{GeneratorSpec, Network, ScenarioSet};

/// Absolute tolerance for the revenue-adequacy checks, $/h.
pub const THEOREM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceScheme {
    /// `λ1 − Hᵀμ`: nominal multipliers only.
    Nlmp,
    /// Nominal plus every scenario's DA and SE congestion components.
    Slmp,
    /// Classic LMP of a deterministic dispatch.
    Edlmp,
}

impl PriceScheme {
    pub fn name(self) -> &'static str {
        match self {
            PriceScheme::Nlmp => "N-LMP",
            PriceScheme::Slmp => "S-LMP",
            PriceScheme::Edlmp => "LMP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceVector {
    pub scheme: PriceScheme,
    pub values: Vec<f64>,
}

fn check_shapes(sc: &ScenarioSet, sol: &DispatchSolution) -> Result<()> {
    let rows = sc.nominal_isf.nrows();
    if sol.duals.mu.len() != rows {
        return Err(Error::MissingDuals("nominal flow"));
    }
    let k = sol.duals.mu_da.len();
    if k > sc.len() || sol.duals.mu_se.iter().chain(&sol.duals.mu_da).any(|m| m.len() != rows) {
        return Err(Error::MissingDuals("scenario flow"));
    }
    Ok(())
}

/// `Σ_k H_kᵀ m_k` for the scenario multipliers in `blocks`.
fn scenario_congestion(sc: &ScenarioSet, blocks: &[&Vec<Vec<f64>>], n: usize) -> DVector<f64> {
    let mut acc = DVector::zeros(n);
    for block in blocks {
        for (k, m) in block.iter().enumerate() {
            acc += sc.isf[k].tr_mul(&DVector::from_column_slice(m));
        }
    }
    acc
}

fn nominal_part(sc: &ScenarioSet, sol: &DispatchSolution) -> DVector<f64> {
    let n = sc.nominal_isf.ncols();
    let h: &DMatrix<f64> = &sc.nominal_isf;
    DVector::from_element(n, sol.duals.lambda) - h.tr_mul(&DVector::from_column_slice(&sol.duals.mu))
}

fn require_recourse(sol: &DispatchSolution) -> Result<()> {
    match sol.variant {
        Variant::Rsced | Variant::Csced => Ok(()),
        _ => Err(Error::MissingDuals("recourse-scenario")),
    }
}

/// `π^N = λ1 − Hᵀμ`.
pub fn nlmp(scenarios: &ScenarioSet, solution: &DispatchSolution) -> Result<PriceVector> {
    require_recourse(solution)?;
    check_shapes(scenarios, solution)?;
    Ok(PriceVector {
        scheme: PriceScheme::Nlmp,
        values: nominal_part(scenarios, solution).as_slice().to_vec(),
    })
}

/// `π^S = λ1 − Hᵀμ − Σ_k H_kᵀ(μ_k^DA + μ_k^SE)`.
pub fn slmp(scenarios: &ScenarioSet, solution: &DispatchSolution) -> Result<PriceVector> {
    require_recourse(solution)?;
    check_shapes(scenarios, solution)?;
    let n = scenarios.nominal_isf.ncols();
    let d = &solution.duals;
    let pi = nominal_part(scenarios, solution) - scenario_congestion(scenarios, &[&d.mu_da, &d.mu_se], n);
    Ok(PriceVector {
        scheme: PriceScheme::Slmp,
        values: pi.as_slice().to_vec(),
    })
}

/// LMP of an ED or P-SCED solve, including any post-contingency rows.
pub fn ed_lmp(scenarios: &ScenarioSet, solution: &DispatchSolution) -> Result<PriceVector> {
    check_shapes(scenarios, solution)?;
    let n = scenarios.nominal_isf.ncols();
    let pi = nominal_part(scenarios, solution) - scenario_congestion(scenarios, &[&solution.duals.mu_da], n);
    Ok(PriceVector {
        scheme: PriceScheme::Edlmp,
        values: pi.as_slice().to_vec(),
    })
}

pub fn prices(scenarios: &ScenarioSet, solution: &DispatchSolution, scheme: PriceScheme) -> Result<PriceVector> {
    match scheme {
        PriceScheme::Nlmp => nlmp(scenarios, solution),
        PriceScheme::Slmp => slmp(scenarios, solution),
        PriceScheme::Edlmp => ed_lmp(scenarios, solution),
    }
}

/// Energy-only profit maximiser over `[g̲, ḡ]`; a price equal to cost picks `ḡ`.
pub fn profit_max_dispatch(price: f64, gen: &GeneratorSpec) -> f64 {
    if price >= gen.cost {
        gen.gmax
    } else {
        gen.gmin
    }
}

/// `Γ_i`: distance between the dispatch and the profit-maximising endpoint.
pub fn dispatch_gap(network: &Network, solution: &DispatchSolution, prices: &PriceVector) -> Vec<f64> {
    network
        .generators
        .iter()
        .zip(&prices.values)
        .zip(&solution.g)
        .map(|((gen, &pi), &g)| {
            if pi >= gen.cost {
                gen.gmax - g
            } else {
                g - gen.gmin
            }
        })
        .collect()
}

/// `LOC_i = |π_i − c_i| Γ_i`.
pub fn loc_payments(network: &Network, solution: &DispatchSolution, prices: &PriceVector) -> Vec<f64> {
    dispatch_gap(network, solution, prices)
        .into_iter()
        .zip(&network.generators)
        .zip(&prices.values)
        .map(|((gap, gen), &pi)| ((pi - gen.cost).abs() * gap).max(0.0))
        .collect()
}

/// LOC rebuilt from multipliers instead of prices, using stationarity in `g`:
/// `π^N − c = γ̄ − γ̲ + Σ_k [H_kᵀ(μ_k^DA + μ_k^SE) + γ̄_k − γ̲_k]`, and
/// `π^S − c` drops the congestion sum. Serves as a cross-check on
/// [`loc_payments`].
pub fn loc_from_multipliers(
    network: &Network,
    scenarios: &ScenarioSet,
    solution: &DispatchSolution,
    prices: &PriceVector,
) -> Result<Vec<f64>> {
    require_recourse(solution)?;
    check_shapes(scenarios, solution)?;
    let n = network.n_buses();
    let d = &solution.duals;
    let mut margin = DVector::from_iterator(n, d.gamma_hi.iter().zip(&d.gamma_lo).map(|(h, l)| h - l));
    for k in 0..d.gamma_hi_k.len() {
        for i in 0..n {
            margin[i] += d.gamma_hi_k[k][i] - d.gamma_lo_k[k][i];
        }
    }
    match prices.scheme {
        PriceScheme::Nlmp => margin += scenario_congestion(scenarios, &[&d.mu_da, &d.mu_se], n),
        PriceScheme::Slmp => {}
        PriceScheme::Edlmp => return Err(Error::MissingDuals("recourse-scenario")),
    }
    let gap = dispatch_gap(network, solution, prices);
    Ok(margin.iter().zip(gap).map(|(m, g)| (m.abs() * g).max(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremFlags {
    /// `MS ≥ −tol`
    pub revenue_adequate: bool,
    /// `MS − Σ LOC ≥ −tol`
    pub total_revenue_nonneg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementReport {
    pub prices: PriceVector,
    /// `π_i d_i`
    pub demand_payments: Vec<f64>,
    /// `π_i g_i`
    pub energy_payments: Vec<f64>,
    /// `Σ_k (ρ̄_k,i r̄_i + ρ̲_k,i r̲_i)`
    pub reserve_payments: Vec<f64>,
    /// Energy plus reserve compensation.
    pub supplier_payments: Vec<f64>,
    pub ms: f64,
    pub loc: Vec<f64>,
    pub total_loc: f64,
    pub total_revenue: f64,
    pub theorem_flags: TheoremFlags,
}

/// Settles the market at `prices`. Reserve payments are zero for
/// variants without reserve variables.
pub fn settle(network: &Network, solution: &DispatchSolution, prices: &PriceVector) -> SettlementReport {
    let n = network.n_buses();
    let demand = network.demand();
    let d = &solution.duals;
    let demand_payments: Vec<f64> = (0..n).map(|i| prices.values[i] * demand[i]).collect();
    let energy_payments: Vec<f64> = (0..n).map(|i| prices.values[i] * solution.g[i]).collect();
    let reserve_payments: Vec<f64> = (0..n)
        .map(|i| {
            let mut pay = 0.0;
            for k in 0..d.rho_hi_k.len() {
                pay += d.rho_hi_k[k][i] * solution.r_up[i] + d.rho_lo_k[k][i] * solution.r_down[i];
            }
            pay
        })
        .collect();
    let supplier_payments: Vec<f64> = (0..n).map(|i| energy_payments[i] + reserve_payments[i]).collect();
    let ms = demand_payments.iter().fold(0.0, |a, b| a + b) - supplier_payments.iter().fold(0.0, |a, b| a + b);
    let loc = loc_payments(network, solution, prices);
    let total_loc = loc.iter().fold(0.0, |a, b| a + b);
    let total_revenue = ms - total_loc;
    SettlementReport {
        prices: prices.clone(),
        demand_payments,
        energy_payments,
        reserve_payments,
        supplier_payments,
        ms,
        loc,
        total_loc,
        total_revenue,
        theorem_flags: TheoremFlags {
            revenue_adequate: ms >= -THEOREM_TOLERANCE,
            total_revenue_nonneg: total_revenue >= -THEOREM_TOLERANCE,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAudit {
    pub alpha: f64,
    pub nlmp: SettlementReport,
    pub slmp: SettlementReport,
    /// N-LMP shortfalls; these are allowed and only recorded.
    pub findings: Vec<String>,
}

/// Settles under both schemes. A negative MS or total revenue under S-LMP is
/// an error (the guarantee can only fail through a bug); N-LMP shortfalls
/// are recorded as findings.
pub fn theorem_audit(network: &Network, scenarios: &ScenarioSet, solution: &DispatchSolution) -> Result<TheoremAudit> {
    let n_set = settle(network, solution, &nlmp(scenarios, solution)?);
    let s_set = settle(network, solution, &slmp(scenarios, solution)?);
    if !s_set.theorem_flags.revenue_adequate {
        return Err(Error::TheoremViolation(format!("S-LMP merchandising surplus {} < 0", s_set.ms)));
    }
    if !s_set.theorem_flags.total_revenue_nonneg {
        return Err(Error::TheoremViolation(format!(
            "S-LMP total revenue {} < 0 (MS {}, LOC {})",
            s_set.total_revenue, s_set.ms, s_set.total_loc
        )));
    }
    let mut findings = Vec::new();
    if !n_set.theorem_flags.revenue_adequate {
        findings.push(format!("N-LMP merchandising surplus is negative: {:.6}", n_set.ms));
    }
    if !n_set.theorem_flags.total_revenue_nonneg {
        findings.push(format!("N-LMP total revenue is negative: {:.6}", n_set.total_revenue));
    }
    Ok(TheoremAudit {
        alpha: solution.alpha,
        nlmp: n_set,
        slmp: s_set,
        findings,
    })
}
