mod common;

use common::{fixture, rel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsced::benders::{benders_solve, decompose, BendersOptions, BlockDecomposition, Termination};
use rsced::cases::{synthetic_feasible, three_bus, SyntheticConfig};
use rsced::cli::case::load_case;
use rsced::lp::LinearProgram;
use rsced::model::{build_csced, build_ed, build_psced, build_rsced, solve_formulation, ContingencyLimit, Formulation};
use rsced::network::{Network, ScenarioSet};
use rsced::Error;

fn three_bus_dec(alpha: f64) -> (Network, ScenarioSet, BlockDecomposition) {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, idx) = build_rsced(&net, &sc, alpha).unwrap();
    let dec = decompose(&lp, &idx).unwrap();
    (net, sc, dec)
}

/// Every row as `coeffs·x ≤ rhs` keyed by variable label: equalities split
/// into two rows, finite bounds become rows, rows with infinite rhs vanish.
fn canonical(lp: &LinearProgram) -> Vec<String> {
    let mut rows = Vec::new();
    let mut push = |coeffs: Vec<(usize, f64)>, rhs: f64| {
        if !rhs.is_finite() {
            return;
        }
        let mut terms: Vec<(String, u64)> = coeffs
            .iter()
            .filter(|(_, a)| *a != 0.0)
            .map(|&(j, a)| (lp.var_labels[j].clone(), (a + 0.0).to_bits()))
            .collect();
        terms.sort();
        rows.push(format!("{terms:?} <= {:x}", (rhs + 0.0).to_bits()));
    };
    for r in &lp.eq_rows {
        push(r.coeffs.clone(), r.rhs);
        push(r.coeffs.iter().map(|&(j, a)| (j, -a)).collect(), -r.rhs);
    }
    for r in &lp.ineq_rows {
        push(r.coeffs.clone(), r.rhs);
    }
    for j in 0..lp.n_vars() {
        push(vec![(j, -1.0)], -lp.lower[j]);
        push(vec![(j, 1.0)], lp.upper[j]);
    }
    rows.sort();
    rows
}

#[test]
fn three_bus_has_one_block_per_contingency() {
    let (net, sc, dec) = three_bus_dec(0.5);
    assert_eq!(dec.blocks.len(), 3);
    let (n, l) = (net.buses.len(), net.lines.len());
    for b in &dec.blocks {
        assert_eq!(b.rows.len(), 2 + 2 * l + 6 * n + 2, "rows of {:?}", b.var_labels);
        assert_eq!(b.cost.len(), 1 + 2 * n);
    }
    assert_eq!(dec.first_stage_len(), 1 + 3 * n);
    let probs = sc.probabilities();
    for (k, b) in dec.blocks.iter().enumerate() {
        // y_k carries the scaled scenario weight p_k / (1 − α).
        assert!((b.cost[0] - probs[k] / 0.5).abs() < 1e-15);
    }
}

#[test]
fn reassembly_is_the_original_lp_in_canonical_form() {
    for alpha in [0.0, 0.9] {
        let (net, sc) = three_bus(0.1).unwrap();
        for (lp, idx) in [build_rsced(&net, &sc, alpha).unwrap(), build_csced(&net, &sc).unwrap()] {
            let dec = decompose(&lp, &idx).unwrap();
            let back = dec.reassemble();
            assert_eq!(back.var_labels, lp.var_labels);
            assert_eq!(back.objective, lp.objective);
            assert_eq!(canonical(&back), canonical(&lp));
        }
    }
}

#[test]
fn single_stage_variants_are_rejected() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, idx) = build_ed(&net).unwrap();
    assert!(matches!(decompose(&lp, &idx), Err(Error::NotDecomposable(_))));
    let (lp, idx) = build_psced(&net, &sc, ContingencyLimit::Nominal).unwrap();
    assert!(matches!(decompose(&lp, &idx), Err(Error::NotDecomposable(_))));
}

#[test]
fn no_scenarios_converges_immediately() {
    let (net, _) = three_bus(0.1).unwrap();
    let sc = ScenarioSet::empty(&net).unwrap();
    let (lp, idx) = build_rsced(&net, &sc, 0.5).unwrap();
    let dec = decompose(&lp, &idx).unwrap();
    let sol = benders_solve(&dec, &BendersOptions::default()).unwrap();
    assert_eq!(sol.trace.iterations.len(), 1);
    assert_eq!(sol.trace.termination, Some(Termination::Converged));
    let mono = solve_formulation(&net, &sc, &Formulation::rsced(0.5)).unwrap();
    assert!(rel(sol.objective, mono.costs.total) <= 1e-9);
}

#[test]
fn slack_rich_first_stage_needs_no_recourse() {
    let (net, sc, dec) = three_bus_dec(0.9);
    let mono = solve_formulation(&net, &sc, &Formulation::rsced(0.9)).unwrap();
    assert!(mono.total_shed() <= 1e-9);
    let mut x0 = vec![mono.z + 1e6];
    x0.extend(mono.g.iter().chain(&mono.r_down).chain(&mono.r_up));
    assert_eq!(x0.len(), dec.first_stage_len());
    for k in 0..dec.blocks.len() {
        let s = dec.solve_subproblem(k, &x0).unwrap();
        assert!(s.value.abs() <= 1e-9, "J_{k} = {}", s.value);
        assert!(s.max_slack <= 1e-9);
        assert!(s.xk[0].abs() <= 1e-9);
    }
}

fn random_first_stage(dec: &BlockDecomposition, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = &dec.master;
    (0..dec.first_stage_len())
        .map(|j| {
            let hi = if m.upper[j].is_finite() { m.upper[j] } else { m.lower[j].max(0.0) + 500.0 };
            rng.gen_range(m.lower[j]..=hi)
        })
        .collect()
}

#[test]
fn subproblem_strong_duality() {
    let (_, _, dec) = three_bus_dec(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x0 = random_first_stage(&dec, &mut rng);
        for k in 0..dec.blocks.len() {
            let s = dec.solve_subproblem(k, &x0).unwrap();
            assert!(s.duals.iter().all(|&l| l >= 0.0));
            let d = dec.dual_value(k, &x0, &s.duals);
            assert!(rel(d, s.value) <= 1e-7, "J {} vs dual {}", s.value, d);
        }
    }
}

#[test]
fn cuts_underestimate_the_recourse_everywhere() {
    let (_, _, dec) = three_bus_dec(0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<Vec<f64>> = (0..20).map(|_| random_first_stage(&dec, &mut rng)).collect();
    for anchor in &points {
        for k in 0..dec.blocks.len() {
            let s = dec.solve_subproblem(k, anchor).unwrap();
            let cut = rsced::benders::Cut { scenario: k, anchor: anchor.clone(), value: s.value, gradient: s.gradient };
            for x in &points {
                let j = dec.solve_subproblem(k, x).unwrap().value;
                let c = cut.eval(x);
                assert!(c <= j + 1e-7 * (1.0 + j.abs()), "cut {c} above recourse {j}");
            }
        }
    }
}

#[test]
fn benders_matches_the_monolithic_solve() {
    for alpha in [0.0, 0.1, 0.5, 0.9] {
        let (net, sc, dec) = three_bus_dec(alpha);
        let mono = solve_formulation(&net, &sc, &Formulation::rsced(alpha)).unwrap();
        let sol = benders_solve(&dec, &BendersOptions::default()).unwrap();
        assert!(rel(sol.objective, mono.costs.total) <= 1e-6, "alpha {alpha}: {} vs {}", sol.objective, mono.costs.total);
        assert!(sol.trace.is_monotone(1e-9));
        for it in &sol.trace.iterations {
            assert!(it.lower_bound <= mono.costs.total + 1e-6 * (1.0 + mono.costs.total.abs()));
            assert!(it.upper_bound >= mono.costs.total - 1e-6 * (1.0 + mono.costs.total.abs()));
            assert!(it.best_upper_bound <= it.upper_bound);
        }
        assert!(sol.trace.final_slack <= 1e-6 && sol.warnings.is_empty());
        assert!(sol.trace.max_cut_violation <= 1e-6 * (1.0 + mono.costs.total.abs()));
    }
}

#[test]
fn csced_decomposes_and_agrees() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, idx) = build_csced(&net, &sc).unwrap();
    let sol = benders_solve(&decompose(&lp, &idx).unwrap(), &BendersOptions::default()).unwrap();
    assert!(rel(sol.objective, 962.2) <= 1e-6, "{}", sol.objective);
}

#[test]
fn fixtures_converge_without_slack() {
    for name in ["case3_triangle.json", "case2_congested.json", "nlmp_deficit.json"] {
        let case = load_case(fixture(name)).unwrap();
        for alpha in [0.0, 0.9] {
            let (lp, idx) = build_rsced(&case.network, &case.scenarios, alpha).unwrap();
            let sol = benders_solve(&decompose(&lp, &idx).unwrap(), &BendersOptions::default()).unwrap();
            let mono = solve_formulation(&case.network, &case.scenarios, &Formulation::rsced(alpha)).unwrap();
            assert!(rel(sol.objective, mono.costs.total) <= 1e-6, "{name} alpha {alpha}");
            assert!(sol.trace.final_slack <= 1e-6, "{name}: slack {}", sol.trace.final_slack);
        }
    }
}

#[test]
fn parallel_and_serial_runs_agree_exactly() {
    let (_, _, dec) = three_bus_dec(0.5);
    let par = benders_solve(&dec, &BendersOptions::default()).unwrap();
    let ser = benders_solve(&dec, &BendersOptions { parallel: false, ..BendersOptions::default() }).unwrap();
    assert_eq!(par.objective, ser.objective);
    assert_eq!(par.primal, ser.primal);
    assert_eq!(par.trace.lower_bounds(), ser.trace.lower_bounds());
}

#[test]
fn trace_exports_one_csv_row_per_iteration() {
    let (_, _, dec) = three_bus_dec(0.5);
    let sol = benders_solve(&dec, &BendersOptions::default()).unwrap();
    let csv = sol.trace.to_csv().unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "lower_bound"));
    assert_eq!(reader.records().count(), sol.trace.iterations.len());
}

#[test]
fn iteration_limit_returns_the_trace() {
    let (_, _, dec) = three_bus_dec(0.5);
    let opts = BendersOptions { max_iterations: 1, gap_tol: 0.0, ..BendersOptions::default() };
    match benders_solve(&dec, &opts) {
        Err(Error::IterationLimit { iterations, trace }) => {
            assert_eq!(iterations, 1);
            assert_eq!(trace.iterations.len(), 1);
            assert_eq!(trace.termination, Some(Termination::IterationLimit));
        }
        other => panic!("expected the iteration limit, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_instances_agree_with_the_monolithic_solve(seed in 0u64..5000, n in 3usize..7, step in 0usize..10) {
        let alpha = step as f64 / 10.0;
        let (net, sc) = synthetic_feasible(&SyntheticConfig::new(n), seed).unwrap();
        let (lp, idx) = build_rsced(&net, &sc, alpha).unwrap();
        let dec = decompose(&lp, &idx).unwrap();
        prop_assert_eq!(canonical(&dec.reassemble()), canonical(&lp));
        let sol = benders_solve(&dec, &BendersOptions::default()).unwrap();
        let mono = solve_formulation(&net, &sc, &Formulation::rsced(alpha)).unwrap();
        prop_assert!(rel(sol.objective, mono.costs.total) <= 1e-6, "{} vs {}", sol.objective, mono.costs.total);
        prop_assert!(sol.trace.is_monotone(1e-7));
    }
}
