mod common;

use common::vertex_oracle::{enumerate_vertices, random_lp, rng};
use common::{dual_objective, LinearProgram};
use proptest::prelude::*;
use rsced::cases::three_bus;
use rsced::lp::{self, verify_kkt, write_lp, DenseSimplex, LpEngine, LpStatus};
use rsced::model::{build_ed, build_rsced, Formulation};

#[test]
fn one_variable_lower_bound() {
    let mut lp = LinearProgram::new();
    lp.add_var("x", 1.0, 1.0, f64::INFINITY);
    let sol = lp::solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_eq!(sol.primal, vec![1.0]);
    assert_eq!(sol.dual_lower, vec![1.0]);
    let report = verify_kkt(&lp, &sol, 1e-10);
    assert!(report.max_residual() <= 1e-10);
}

#[test]
fn three_bus_ed_costs_926() {
    let (net, _) = three_bus(0.1).unwrap();
    let (lp, _) = build_ed(&net).unwrap();
    let sol = lp::solve(&lp).unwrap();
    assert!((sol.objective - 926.4667).abs() < 1e-3, "{}", sol.objective);
}

#[test]
fn rsced_certifies_tightly() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, _) = build_rsced(&net, &sc, 0.0).unwrap();
    let sol = lp::solve(&lp).unwrap();
    let report = verify_kkt(&lp, &sol, 1e-7);
    assert!(report.passes(1e-7), "{:?}", report.violations.first());
    assert!(common::rel(dual_objective(&lp, &sol), sol.objective) <= 1e-7);
}

#[test]
fn perturbed_rsced_primal_is_caught() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, idx) = build_rsced(&net, &sc, 0.0).unwrap();
    let mut sol = lp::solve(&lp).unwrap();
    sol.primal[idx.g.start + 1] += 0.1;
    let report = verify_kkt(&lp, &sol, 1e-6);
    assert!(!report.passes(1e-6));
    assert!(report.max_primal_residual > 1e-3 || report.max_complementarity_residual > 1e-3);
}

#[test]
fn solves_are_deterministic() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, _) = build_rsced(&net, &sc, 0.1).unwrap();
    let a = serde_json::to_string(&lp::solve(&lp).unwrap()).unwrap();
    let b = serde_json::to_string(&lp::solve(&lp).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn engine_seam_matches_free_function() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, _) = rsced::model::build_formulation(&net, &sc, &Formulation::rsced(0.9)).unwrap();
    let engine: &dyn LpEngine = &DenseSimplex::default();
    assert_eq!(engine.solve(&lp).unwrap(), lp::solve(&lp).unwrap());
}

#[test]
fn dump_lists_every_row_and_bound() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, _) = build_rsced(&net, &sc, 0.0).unwrap();
    let text = write_lp(&lp);
    assert!(text.starts_with("Minimize\n obj: "));
    assert!(text.ends_with("End\n"));
    assert!(text.contains(" balance: "));
    assert!(text.contains(" epigraph_2_: "));
    // Each scenario opens one line in both directions, for the DA and SE blocks.
    assert_eq!(text.matches(": inactive").count(), 3 * 2 * 2);
    let bounds = text.split("Bounds\n").nth(1).unwrap();
    assert_eq!(bounds.lines().count() - 1, lp.n_vars());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..7, m in 1usize..7) {
        let lp = random_lp(&mut rng(seed), n, m);
        let sol = lp::solve(&lp).unwrap();
        match enumerate_vertices(&lp) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - best).abs() <= 1e-8 * (1.0 + best.abs()));
                prop_assert!((dual_objective(&lp, &sol) - sol.objective).abs() <= 1e-7 * (1.0 + sol.objective.abs()));
                let report = verify_kkt(&lp, &sol, 1e-7);
                prop_assert!(report.max_complementarity_residual <= 1e-7);
            }
        }
    }
}
