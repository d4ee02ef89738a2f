//! Report types returned by the commands and their text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::benders::{BendersTrace, Termination};
use crate::error::{Error, Result};
use crate::lp::KktReport;
use crate::model::{CostBreakdown, Variant};
use crate::pricing::SettlementReport;

use super::case::{Method, Pricing};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusDispatch {
    pub bus: usize,
    pub g: f64,
    pub r_up: f64,
    pub r_down: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShedSummary {
    /// MW summed over scenarios.
    pub total: f64,
    /// Probability-weighted MW.
    pub expected: f64,
    pub max: f64,
    pub per_scenario: Vec<f64>,
    /// CVaR of the load-shed cost at the run's alpha, $/h.
    pub cvar_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktSummary {
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub max_stationarity_residual: f64,
    pub max_complementarity_residual: f64,
    pub certified: bool,
}

impl KktSummary {
    pub fn from_report(r: &KktReport, tol: f64) -> Self {
        KktSummary {
            max_primal_residual: r.max_primal_residual,
            max_dual_residual: r.max_dual_residual,
            max_stationarity_residual: r.max_stationarity_residual,
            max_complementarity_residual: r.max_complementarity_residual,
            certified: r.passes(tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersSummary {
    pub iterations: usize,
    pub termination: Option<Termination>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub max_cut_violation: f64,
    pub final_slack: f64,
    /// Objective of the monolithic re-solve used for settlement duals.
    pub monolithic_objective: Option<f64>,
}

impl BendersSummary {
    pub fn from_trace(trace: &BendersTrace, monolithic_objective: Option<f64>) -> Self {
        let last = trace.iterations.last();
        BendersSummary {
            iterations: trace.iterations.len(),
            termination: trace.termination,
            lower_bound: last.map_or(f64::NAN, |i| i.lower_bound),
            upper_bound: last.map_or(f64::NAN, |i| i.best_upper_bound),
            max_cut_violation: trace.max_cut_violation,
            final_slack: trace.final_slack,
            monolithic_objective,
        }
    }
}

/// Output of `solve`. Apart from `timing_ms`, serialisation is a pure
/// function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub case: Option<String>,
    pub variant: Variant,
    pub alpha: f64,
    pub method: Method,
    pub pricing: Pricing,
    pub objective: f64,
    pub costs: CostBreakdown,
    pub dispatch: Vec<BusDispatch>,
    pub shed: ShedSummary,
    pub kkt: Option<KktSummary>,
    pub benders: Option<BendersSummary>,
    pub settlements: Vec<SettlementReport>,
    pub warnings: Vec<String>,
    pub timing_ms: f64,
}

impl RunReport {
    /// JSON with the timing field zeroed, for byte-level comparisons.
    pub fn to_canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.timing_ms = 0.0;
        to_json(&copy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Alpha,
    Probability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: String,
    pub objective: Option<f64>,
    pub nominal_cost: Option<f64>,
    pub reserve_cost: Option<f64>,
    pub cvar_term: Option<f64>,
    pub total_shed: Option<f64>,
    pub expected_shed: Option<f64>,
    pub max_shed: Option<f64>,
    pub ms_nlmp: Option<f64>,
    pub loc_nlmp: Option<f64>,
    pub ms_slmp: Option<f64>,
    pub loc_slmp: Option<f64>,
}

impl SweepRow {
    pub fn failed(value: f64, status: String) -> Self {
        SweepRow {
            value,
            status,
            objective: None,
            nominal_cost: None,
            reserve_cost: None,
            cvar_term: None,
            total_shed: None,
            expected_shed: None,
            max_shed: None,
            ms_nlmp: None,
            loc_nlmp: None,
            ms_slmp: None,
            loc_slmp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema_version: u32,
    pub axis: SweepAxis,
    pub variant: Variant,
    /// Contingency varied by a probability sweep.
    pub target: Option<usize>,
    pub rows: Vec<SweepRow>,
}

/// One alpha of a benchmark. Fields of a method that was not run are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub alpha: f64,
    pub monolithic_objective: Option<f64>,
    pub benders_objective: Option<f64>,
    /// Present only when both methods ran.
    pub relative_difference: Option<f64>,
    pub benders_iterations: Option<usize>,
    pub monolithic_ms: Option<f64>,
    pub benders_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub schema_version: u32,
    pub variant: Variant,
    pub buses: usize,
    pub scenarios: usize,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub case: Option<String>,
    pub buses: usize,
    pub lines: usize,
    pub generators: usize,
    pub scenarios: usize,
    pub outage_probability: f64,
    pub total_demand: f64,
    pub total_capacity: f64,
    pub warnings: Vec<String>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialise");
    s.push('\n');
    s
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

fn price_of(report: &RunReport, bus: usize) -> Vec<String> {
    report
        .settlements
        .iter()
        .map(|s| format!("{:>10.4}", s.prices.values[bus]))
        .collect()
}

pub fn render_run(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_json(report)),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                bus: usize,
                g: f64,
                r_up: f64,
                r_down: f64,
                nlmp: Option<f64>,
                slmp: Option<f64>,
                edlmp: Option<f64>,
            }
            let find = |scheme: crate::pricing::PriceScheme, bus: usize| {
                report
                    .settlements
                    .iter()
                    .find(|s| s.prices.scheme == scheme)
                    .map(|s| s.prices.values[bus])
            };
            use crate::pricing::PriceScheme::*;
            let rows: Vec<Row> = report
                .dispatch
                .iter()
                .map(|d| Row {
                    bus: d.bus,
                    g: d.g,
                    r_up: d.r_up,
                    r_down: d.r_down,
                    nlmp: find(Nlmp, d.bus),
                    slmp: find(Slmp, d.bus),
                    edlmp: find(Edlmp, d.bus),
                })
                .collect();
            rows_to_csv(&rows)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} alpha={} method={}  objective {:.4}",
                report.variant.name(),
                report.alpha,
                report.method.name(),
                report.objective
            );
            let _ = writeln!(
                s,
                "  nominal {:.4}  reserve {:.4}  cvar term {:.4}",
                report.costs.nominal, report.costs.reserve, report.costs.cvar_term
            );
            let _ = writeln!(
                s,
                "  shed: total {:.4} MW  expected {:.4} MW  max {:.4} MW",
                report.shed.total, report.shed.expected, report.shed.max
            );
            let schemes: Vec<String> = report.settlements.iter().map(|r| format!("{:>10}", r.prices.scheme.name())).collect();
            let _ = writeln!(s, "  {:>4} {:>10} {:>10} {:>10} {}", "bus", "g", "r_up", "r_down", schemes.join(" "));
            for d in &report.dispatch {
                let _ = writeln!(
                    s,
                    "  {:>4} {:>10.4} {:>10.4} {:>10.4} {}",
                    d.bus,
                    d.g,
                    d.r_up,
                    d.r_down,
                    price_of(report, d.bus).join(" ")
                );
            }
            for st in &report.settlements {
                let _ = writeln!(
                    s,
                    "  {}: MS {:.4}  LOC {:.4}  revenue {:.4}",
                    st.prices.scheme.name(), st.ms, st.total_loc, st.total_revenue
                );
            }
            if let Some(k) = &report.kkt {
                let _ = writeln!(
                    s,
                    "  KKT: primal {:.2e} dual {:.2e} stationarity {:.2e} complementarity {:.2e} ({})",
                    k.max_primal_residual,
                    k.max_dual_residual,
                    k.max_stationarity_residual,
                    k.max_complementarity_residual,
                    if k.certified { "certified" } else { "NOT certified" }
                );
            }
            if let Some(b) = &report.benders {
                let _ = writeln!(
                    s,
                    "  Benders: {} iterations, bounds [{:.6}, {:.6}], {}",
                    b.iterations,
                    b.lower_bound,
                    b.upper_bound,
                    b.termination.map_or("not run", |t| t.name())
                );
            }
            for w in &report.warnings {
                let _ = writeln!(s, "  warning: {w}");
            }
            Ok(s)
        }
    }
}

pub fn render_sweep(table: &SweepTable, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_json(table)),
        Format::Csv => rows_to_csv(&table.rows),
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:>8} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10}  status",
                "value", "objective", "nominal", "reserve", "cvar", "shed", "max", "MS[N]", "LOC[N]", "MS[S]", "LOC[S]"
            );
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "{:>8.4} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10}  {}",
                    r.value,
                    opt(r.objective),
                    opt(r.nominal_cost),
                    opt(r.reserve_cost),
                    opt(r.cvar_term),
                    opt(r.total_shed),
                    opt(r.max_shed),
                    opt(r.ms_nlmp),
                    opt(r.loc_nlmp),
                    opt(r.ms_slmp),
                    opt(r.loc_slmp),
                    r.status
                );
            }
            Ok(s)
        }
    }
}

pub fn render_bench(table: &BenchTable, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_json(table)),
        Format::Csv => rows_to_csv(&table.rows),
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} on {} buses, {} scenarios",
                table.variant.name(),
                table.buses,
                table.scenarios
            );
            let _ = writeln!(
                s,
                "{:>6} {:>14} {:>14} {:>10} {:>6} {:>10} {:>10}",
                "alpha", "monolithic", "benders", "rel diff", "iters", "mono ms", "benders ms"
            );
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "{:>6.2} {:>14} {:>14} {:>10} {:>6} {:>10} {:>10}",
                    r.alpha,
                    r.monolithic_objective.map_or("-".into(), |v| format!("{v:.6}")),
                    r.benders_objective.map_or("-".into(), |v| format!("{v:.6}")),
                    r.relative_difference.map_or("-".into(), |v| format!("{v:.2e}")),
                    r.benders_iterations.map_or("-".into(), |v| v.to_string()),
                    r.monolithic_ms.map_or("-".into(), |v| format!("{v:.1}")),
                    r.benders_ms.map_or("-".into(), |v| format!("{v:.1}")),
                );
            }
            Ok(s)
        }
    }
}

pub fn render_validation(summary: &ValidationSummary, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_json(summary)),
        Format::Csv => rows_to_csv(&[summary.clone()].map(|s| {
            (s.buses, s.lines, s.generators, s.scenarios, s.outage_probability, s.total_demand, s.total_capacity)
        })),
        Format::Table => {
            let mut s = format!(
                "ok: {} buses, {} lines, {} generators, {} scenarios (outage probability {:.4}), demand {:.2} MW, capacity {:.2} MW\n",
                summary.buses,
                summary.lines,
                summary.generators,
                summary.scenarios,
                summary.outage_probability,
                summary.total_demand,
                summary.total_capacity
            );
            for w in &summary.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            Ok(s)
        }
    }
}
