//! The `rsced` command line: `solve`, `sweep`, `bench` and `validate`.
//!
//! Every command is also available as a plain function returning a
//! serialisable report, so the binary is a thin wrapper over [`run`].

pub mod case;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::benders::{benders_solve, decompose, BendersOptions};
use crate::cases::{synthetic_feasible, SyntheticConfig, DA_MULTIPLIER, SE_MULTIPLIER};
use crate::error::{Error, Result};
use crate::model::{build_formulation, cvar, from_primal, shed_distribution, solve_dispatch, ContingencyLimit, DispatchSolution, Formulation, Variant};
use crate::network::ScenarioSet;
use crate::parallel;
use crate::pricing::{ed_lmp, settle, theorem_audit, SettlementReport};

pub use case::{load_case, parse_case, Case, CaseFile, Method, Pricing, ScenarioConfig, SolveConfig};
pub use report::{
    BenchRow, BenchTable, BendersSummary, BusDispatch, Format, KktSummary, RunReport, ShedSummary, SweepAxis, SweepRow,
    SweepTable, ValidationSummary, REPORT_SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_ITERATION_LIMIT: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Unbounded(_) | Error::SubproblemUnbounded(_) => EXIT_UNBOUNDED,
        Error::IterationLimit { .. } => EXIT_ITERATION_LIMIT,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "rsced", version, about = "Risk-sensitive security-constrained economic dispatch")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one dispatch and settle it.
    Solve(SolveArgs),
    /// Re-solve over a grid of alpha or outage-probability values.
    Sweep(SweepArgs),
    /// Compare monolithic and Benders solves.
    Bench(BenchArgs),
    /// Check a case file and print a summary.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Case file, or `synthetic:N` for a generated N-bus ring.
    #[arg(long)]
    pub case: String,
    /// Seed for `synthetic:N` cases.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the report here (CSV when --format csv, else JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub pricing: Option<Pricing>,
    /// Which rating P-SCED enforces after an outage.
    #[arg(long, value_enum)]
    pub psced_limit: Option<ContingencyLimit>,
    /// Relative objective tolerance between methods.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl ConfigArgs {
    fn apply(&self, mut cfg: SolveConfig) -> SolveConfig {
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(p) = self.pricing {
            cfg.pricing = p;
        }
        if let Some(l) = self.psced_limit {
            cfg.psced_limit = l;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.objective = t;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = SweepAxis::Alpha)]
    pub axis: SweepAxis,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    /// Contingency whose probability a probability sweep varies.
    #[arg(long)]
    pub target: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Comma-separated alpha values; defaults to the configured alpha.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Comma-separated methods to run; defaults to both.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub methods: Vec<Method>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Resolves `--case`: a path, or `synthetic:N` drawn with `seed`.
pub fn resolve_case(spec: &str, seed: u64) -> Result<Case> {
    if let Some(n) = spec.strip_prefix("synthetic:") {
        let buses: usize = n.parse().map_err(|_| Error::Validation {
            path: "--case".into(),
            message: format!("expected synthetic:N with N a bus count, got {spec:?}"),
        })?;
        if buses < 2 {
            return Err(Error::Validation {
                path: "--case".into(),
                message: "synthetic cases need at least 2 buses".into(),
            });
        }
        let (net, sc) = synthetic_feasible(&SyntheticConfig::new(buses), seed)?;
        let p = sc.contingencies.first().map_or(0.0, |c| c.probability);
        let file = CaseFile::from_network(
            &net,
            ScenarioConfig {
                mode: case::ScenarioMode::AllSingleLines,
                probabilities: case::Probabilities::Uniform(p),
                da_multiplier: DA_MULTIPLIER,
                se_multiplier: SE_MULTIPLIER,
                contingencies: Vec::new(),
            },
            Some(format!("synthetic-{buses}-seed-{seed}")),
        );
        return file.build();
    }
    load_case(spec)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn formulation(cfg: &SolveConfig) -> Formulation {
    Formulation {
        variant: cfg.variant,
        alpha: cfg.alpha,
        psced_limit: cfg.psced_limit,
    }
}

fn effective_alpha(cfg: &SolveConfig) -> f64 {
    if cfg.variant == Variant::Rsced {
        cfg.alpha
    } else {
        0.0
    }
}

fn monolithic(case: &Case, scenarios: &ScenarioSet, cfg: &SolveConfig) -> Result<DispatchSolution> {
    let (lp, idx) = build_formulation(&case.network, scenarios, &formulation(cfg))?;
    solve_dispatch(&lp, &idx, effective_alpha(cfg))
}

struct BendersRun {
    solution: DispatchSolution,
    trace: crate::benders::BendersTrace,
    warnings: Vec<String>,
}

fn benders(case: &Case, scenarios: &ScenarioSet, cfg: &SolveConfig) -> Result<BendersRun> {
    let (lp, idx) = build_formulation(&case.network, scenarios, &formulation(cfg))?;
    let dec = decompose(&lp, &idx)?;
    let out = benders_solve(&dec, &BendersOptions::default())?;
    Ok(BendersRun {
        solution: from_primal(&lp, &idx, &out.primal, effective_alpha(cfg)),
        trace: out.trace,
        warnings: out.warnings,
    })
}

fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Settlements requested by `pricing`. Recourse variants are audited so a
/// failed S-LMP guarantee surfaces as an error; N-LMP shortfalls become
/// warnings.
fn settlements(
    case: &Case,
    scenarios: &ScenarioSet,
    sol: &DispatchSolution,
    pricing: Pricing,
    warnings: &mut Vec<String>,
) -> Result<Vec<SettlementReport>> {
    if pricing == Pricing::None {
        return Ok(Vec::new());
    }
    match sol.variant {
        Variant::Rsced | Variant::Csced => {
            let audit = theorem_audit(&case.network, scenarios, sol)?;
            warnings.extend(audit.findings);
            Ok(match pricing {
                Pricing::Nlmp => vec![audit.nlmp],
                Pricing::Slmp => vec![audit.slmp],
                _ => vec![audit.nlmp, audit.slmp],
            })
        }
        Variant::Ed | Variant::Psced => {
            let prices = ed_lmp(scenarios, sol)?;
            Ok(vec![settle(&case.network, sol, &prices)])
        }
    }
}

fn run_with_scenarios(case: &Case, scenarios: &ScenarioSet, cfg: &SolveConfig) -> Result<RunReport> {
    check_alpha(cfg.alpha)?;
    let started = Instant::now();
    let mut warnings = scenarios.warnings.clone();
    let (priced, reported, benders_summary) = match cfg.method {
        Method::Monolithic => {
            let sol = monolithic(case, scenarios, cfg)?;
            (sol.clone(), sol, None)
        }
        Method::Benders => {
            let run = benders(case, scenarios, cfg)?;
            warnings.extend(run.warnings);
            if cfg.pricing == Pricing::None {
                let summary = BendersSummary::from_trace(&run.trace, None);
                (run.solution.clone(), run.solution, Some(summary))
            } else {
                // Decomposition yields no multipliers for the coupled
                // problem; prices come from one monolithic solve.
                let mono = monolithic(case, scenarios, cfg)?;
                let diff = relative_difference(mono.costs.total, run.solution.costs.total);
                if diff > cfg.tolerances.objective {
                    warnings.push(format!(
                        "Benders objective {} differs from the monolithic re-solve {} (relative {diff:.2e})",
                        run.solution.costs.total, mono.costs.total
                    ));
                }
                warnings.push("settlement prices use duals from a monolithic re-solve".into());
                let summary = BendersSummary::from_trace(&run.trace, Some(mono.costs.total));
                (mono, run.solution, Some(summary))
            }
        }
    };
    let kkt = priced.kkt.as_ref().map(|r| KktSummary::from_report(r, cfg.tolerances.kkt));
    if let Some(k) = &kkt {
        if !k.certified {
            warnings.push(format!("KKT residuals exceed {:e}", cfg.tolerances.kkt));
        }
    }
    let settlements = settlements(case, scenarios, &priced, cfg.pricing, &mut warnings)?;
    let probs = scenarios.probabilities();
    let dist = shed_distribution(&reported, &case.network, scenarios);
    let shed = ShedSummary {
        total: reported.total_shed(),
        expected: reported.expected_shed(&probs),
        max: reported.max_shed(),
        per_scenario: reported.scenario_shed(),
        cvar_cost: cvar(effective_alpha(cfg), &dist)?,
    };
    let dispatch = (0..case.network.n_buses())
        .map(|i| BusDispatch {
            bus: i,
            g: reported.g[i],
            r_up: reported.r_up.get(i).copied().unwrap_or(0.0),
            r_down: reported.r_down.get(i).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        case: case.file.name.clone(),
        variant: cfg.variant,
        alpha: cfg.alpha,
        method: cfg.method,
        pricing: cfg.pricing,
        objective: reported.costs.total,
        costs: reported.costs,
        dispatch,
        shed,
        kkt,
        benders: benders_summary,
        settlements,
        warnings,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Solves `case` under `cfg` and settles the result.
pub fn cmd_solve(case: &Case, cfg: &SolveConfig) -> Result<RunReport> {
    run_with_scenarios(case, &case.scenarios, cfg)
}

fn sweep_row(case: &Case, cfg: &SolveConfig, axis: SweepAxis, target: Option<usize>, value: f64) -> SweepRow {
    let attempt = || -> Result<RunReport> {
        let mut cfg = *cfg;
        let scenarios = match axis {
            SweepAxis::Alpha => {
                cfg.alpha = value;
                case.scenarios.clone()
            }
            SweepAxis::Probability => {
                let k = target.expect("checked by cmd_sweep");
                let mut probs = case.scenarios.probabilities();
                probs[k] = value;
                case.scenarios.with_probabilities(&probs)?
            }
        };
        cfg.pricing = match cfg.variant {
            Variant::Rsced | Variant::Csced => Pricing::Both,
            _ => Pricing::None,
        };
        run_with_scenarios(case, &scenarios, &cfg)
    };
    match attempt() {
        Ok(r) => {
            let find = |s: crate::pricing::PriceScheme| r.settlements.iter().find(|x| x.prices.scheme == s);
            let n = find(crate::pricing::PriceScheme::Nlmp);
            let s = find(crate::pricing::PriceScheme::Slmp);
            SweepRow {
                value,
                status: "optimal".into(),
                objective: Some(r.objective),
                nominal_cost: Some(r.costs.nominal),
                reserve_cost: Some(r.costs.reserve),
                cvar_term: Some(r.costs.cvar_term),
                total_shed: Some(r.shed.total),
                expected_shed: Some(r.shed.expected),
                max_shed: Some(r.shed.max),
                ms_nlmp: n.map(|x| x.ms),
                loc_nlmp: n.map(|x| x.total_loc),
                ms_slmp: s.map(|x| x.ms),
                loc_slmp: s.map(|x| x.total_loc),
            }
        }
        Err(e) => SweepRow::failed(value, e.to_string()),
    }
}

/// Re-solves along `grid`. Rows run on the worker pool; the output keeps
/// grid order and per-row failures are reported in `status`.
pub fn cmd_sweep(case: &Case, cfg: &SolveConfig, axis: SweepAxis, grid: &[f64], target: Option<usize>) -> Result<SweepTable> {
    if axis == SweepAxis::Probability {
        match target {
            Some(k) if k < case.scenarios.len() => {}
            Some(k) => {
                return Err(Error::Validation {
                    path: "--target".into(),
                    message: format!("no contingency {k}; the case has {}", case.scenarios.len()),
                })
            }
            None => {
                return Err(Error::Validation {
                    path: "--target".into(),
                    message: "a probability sweep needs --target".into(),
                })
            }
        }
    }
    let pool = parallel::pool()?;
    let rows = pool.install(|| grid.par_iter().map(|&v| sweep_row(case, cfg, axis, target, v)).collect());
    Ok(SweepTable {
        schema_version: REPORT_SCHEMA_VERSION,
        axis,
        variant: cfg.variant,
        target,
        rows,
    })
}

/// Solves each alpha with every method in `methods` (both when empty).
/// With two methods, fails with `ObjectiveMismatch` when the objectives
/// disagree beyond `cfg.tolerances.objective`. Timings are informational.
pub fn cmd_bench(case: &Case, cfg: &SolveConfig, methods: &[Method], alphas: &[f64]) -> Result<BenchTable> {
    let alphas = if alphas.is_empty() { vec![cfg.alpha] } else { alphas.to_vec() };
    let methods = if methods.is_empty() { &[Method::Monolithic, Method::Benders][..] } else { methods };
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        check_alpha(alpha)?;
        let cfg = SolveConfig { alpha, ..*cfg };
        let mut row = BenchRow {
            alpha,
            monolithic_objective: None,
            benders_objective: None,
            relative_difference: None,
            benders_iterations: None,
            monolithic_ms: None,
            benders_ms: None,
        };
        if methods.contains(&Method::Monolithic) {
            let t0 = Instant::now();
            let mono = monolithic(case, &case.scenarios, &cfg)?;
            row.monolithic_ms = Some(t0.elapsed().as_secs_f64() * 1e3);
            row.monolithic_objective = Some(mono.costs.total);
        }
        if methods.contains(&Method::Benders) {
            let t1 = Instant::now();
            let run = benders(case, &case.scenarios, &cfg)?;
            row.benders_ms = Some(t1.elapsed().as_secs_f64() * 1e3);
            row.benders_objective = Some(run.solution.costs.total);
            row.benders_iterations = Some(run.trace.iterations.len());
        }
        if let (Some(m), Some(b)) = (row.monolithic_objective, row.benders_objective) {
            let diff = relative_difference(m, b);
            if diff > cfg.tolerances.objective {
                return Err(Error::ObjectiveMismatch(format!(
                    "alpha {alpha}: monolithic {m} vs Benders {b} (relative {diff:.3e})"
                )));
            }
            row.relative_difference = Some(diff);
        }
        rows.push(row);
    }
    Ok(BenchTable {
        schema_version: REPORT_SCHEMA_VERSION,
        variant: cfg.variant,
        buses: case.network.n_buses(),
        scenarios: case.scenarios.len(),
        rows,
    })
}

pub fn cmd_validate(case: &Case) -> ValidationSummary {
    let net = &case.network;
    ValidationSummary {
        case: case.file.name.clone(),
        buses: net.n_buses(),
        lines: net.n_lines(),
        generators: case.file.generators.len(),
        scenarios: case.scenarios.len(),
        outage_probability: case.scenarios.probabilities().iter().fold(0.0, |a, p| a + p),
        total_demand: net.total_demand(),
        total_capacity: net.gmax().iter().sum(),
        warnings: case.scenarios.warnings.clone(),
    }
}

fn emit(rendered: String, json: String, csv: Option<String>, output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    stdout.write_all(rendered.as_bytes())?;
    if let Some(path) = &output.out {
        let body = match (output.format, csv) {
            (Format::Csv, Some(c)) => c,
            _ => json,
        };
        std::fs::write(path, body)?;
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let case = resolve_case(&a.case.case, a.case.seed)?;
            let cfg = a.config.apply(case.file.solve);
            let rep = cmd_solve(&case, &cfg)?;
            let csv = report::render_run(&rep, Format::Csv)?;
            emit(report::render_run(&rep, a.output.format)?, report::to_json(&rep), Some(csv), &a.output, stdout)
        }
        Command::Sweep(a) => {
            let case = resolve_case(&a.case.case, a.case.seed)?;
            let cfg = a.config.apply(case.file.solve);
            let table = cmd_sweep(&case, &cfg, a.axis, &a.grid, a.target)?;
            let csv = report::render_sweep(&table, Format::Csv)?;
            emit(report::render_sweep(&table, a.output.format)?, report::to_json(&table), Some(csv), &a.output, stdout)
        }
        Command::Bench(a) => {
            let case = resolve_case(&a.case.case, a.case.seed)?;
            let cfg = a.config.apply(case.file.solve);
            let table = cmd_bench(&case, &cfg, &a.methods, &a.alphas)?;
            let csv = report::render_bench(&table, Format::Csv)?;
            emit(report::render_bench(&table, a.output.format)?, report::to_json(&table), Some(csv), &a.output, stdout)
        }
        Command::Validate(a) => {
            let case = resolve_case(&a.case.case, a.case.seed)?;
            let summary = cmd_validate(&case);
            emit(report::render_validation(&summary, a.output.format)?, report::to_json(&summary), None, &a.output, stdout)
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
