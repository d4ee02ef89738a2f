mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rsced::cases::{synthetic_feasible, three_bus, three_bus_network, SyntheticConfig, DA_MULTIPLIER, SE_MULTIPLIER};
use rsced::model::{
    build_csced, build_ed, build_psced, build_rsced, cvar, shed_distribution, solve_dispatch, solve_formulation,
    ContingencyLimit, DispatchSolution, Formulation, LoadShedDistribution, Variant, KKT_TOLERANCE,
};
use rsced::network::{all_single_line_contingencies, Bus, GeneratorSpec, Network, ScenarioSet};
use rsced::Error;

fn solve(net: &Network, sc: &ScenarioSet, variant: Variant) -> DispatchSolution {
    solve_formulation(net, sc, &Formulation::new(variant)).unwrap()
}

fn rsced(alpha: f64) -> DispatchSolution {
    let (net, sc) = three_bus(0.1).unwrap();
    solve_formulation(&net, &sc, &Formulation::rsced(alpha)).unwrap()
}

fn assert_dispatch(sol: &DispatchSolution, g: [f64; 3], tol: f64) {
    for i in 0..3 {
        assert!((sol.g[i] - g[i]).abs() <= tol, "g = {:?}, expected {:?}", sol.g, g);
    }
}

#[test]
fn ed_on_three_bus() {
    let (net, sc) = three_bus(0.1).unwrap();
    let sol = solve(&net, &sc, Variant::Ed);
    assert_dispatch(&sol, [144.3333, 170.6667, 0.0], 1e-3);
    assert_abs_diff_eq!(sol.costs.total, 926.4667, epsilon = 1e-3);
    assert!(sol.duals.mu_da.is_empty() && sol.duals.lambda_k.is_empty() && sol.dd.is_empty());
}

#[test]
fn ed_on_one_bus() {
    let net = Network::new(
        vec![Bus { id: 0, demand: 10.0, voll: 100.0 }],
        vec![],
        vec![GeneratorSpec { cost: 5.0, gmax: 20.0, ..GeneratorSpec::empty(0) }],
        0,
    )
    .unwrap();
    let sc = ScenarioSet::empty(&net).unwrap();
    let sol = solve(&net, &sc, Variant::Ed);
    assert_eq!(sol.g, vec![10.0]);
    assert_eq!(sol.costs.total, 50.0);
}

#[test]
fn ed_without_bottleneck_follows_merit_order() {
    let mut net = three_bus_network();
    net.lines[2].capacity = 9000.0;
    let sc = ScenarioSet::empty(&net).unwrap();
    let sol = solve(&net, &sc, Variant::Ed);
    // Merit order: bus 1 (1.2) fills to 200 MW, bus 0 (5) takes the remaining 115.
    assert_dispatch(&sol, [115.0, 200.0, 0.0], 1e-6);
}

#[test]
fn psced_on_three_bus() {
    let (net, sc) = three_bus(0.1).unwrap();
    let sol = solve(&net, &sc, Variant::Psced);
    assert_dispatch(&sol, [110.0, 160.0, 45.0], 1e-6);
    assert_abs_diff_eq!(sol.costs.total, 1192.0, epsilon = 1e-6);
}

#[test]
fn psced_limit_choices_are_ordered() {
    let (net, sc) = three_bus(0.1).unwrap();
    let cost = |limit| {
        let form = Formulation { psced_limit: limit, ..Formulation::new(Variant::Psced) };
        solve_formulation(&net, &sc, &form).unwrap().costs.total
    };
    let (nominal, se, da) = (cost(ContingencyLimit::Nominal), cost(ContingencyLimit::Se), cost(ContingencyLimit::Da));
    assert!(da <= se + 1e-9 && se <= nominal + 1e-9, "{da} {se} {nominal}");
}

#[test]
fn psced_without_scenarios_is_ed() {
    let net = three_bus_network();
    let sc = ScenarioSet::empty(&net).unwrap();
    let a = solve(&net, &sc, Variant::Psced);
    let b = solve(&net, &sc, Variant::Ed);
    assert_eq!(a.g, b.g);
    assert_eq!(a.costs.total, b.costs.total);
}

#[test]
fn csced_on_three_bus() {
    let (net, sc) = three_bus(0.1).unwrap();
    let sol = solve(&net, &sc, Variant::Csced);
    assert_dispatch(&sol, [119.0, 181.0, 15.0], 1e-6);
    assert_abs_diff_eq!(sol.costs.nominal, 962.2, epsilon = 1e-6);
    assert!(sol.dd.iter().flatten().all(|&d| d == 0.0));
}

#[test]
fn csced_without_reserves_is_psced_at_se_limits() {
    let mut net = three_bus_network();
    for g in &mut net.generators {
        g.reserve_cap_up = 0.0;
        g.reserve_cap_down = 0.0;
    }
    let sc = all_single_line_contingencies(&net, 0.1, DA_MULTIPLIER, SE_MULTIPLIER).unwrap();
    let c = solve(&net, &sc, Variant::Csced);
    let form = Formulation { psced_limit: ContingencyLimit::Se, ..Formulation::new(Variant::Psced) };
    let p = solve_formulation(&net, &sc, &form).unwrap();
    assert_abs_diff_eq!(c.costs.total, p.costs.total, epsilon = 1e-6);
    for i in 0..3 {
        assert_abs_diff_eq!(c.g[i], p.g[i], epsilon = 1e-6);
    }
}

#[test]
fn csced_without_shed_free_recourse_is_infeasible() {
    // Bus 2 cannot generate; losing line 0-2 forces its 70 MW over line 1-2,
    // inside the 90 MW DA rating but above the 60 MW SE rating.
    let mut net = three_bus_network();
    net.generators[2] = GeneratorSpec::empty(2);
    net.buses[2].demand = 70.0;
    let sc = all_single_line_contingencies(&net, 0.1, DA_MULTIPLIER, SE_MULTIPLIER).unwrap();
    let err = solve_formulation(&net, &sc, &Formulation::new(Variant::Csced)).unwrap_err();
    assert!(matches!(&err, Error::Infeasible(v) if v == "C-SCED"), "{err}");
    let sol = solve_formulation(&net, &sc, &Formulation::rsced(0.0)).unwrap();
    assert_abs_diff_eq!(sol.scenario_shed()[1], 10.0, epsilon = 1e-9);
}

#[test]
fn rsced_three_bus_alpha_rows() {
    // Published values, checked at the precision they are printed with.
    let cases = [
        (0.0, [119.0, 181.0, 15.0], 962.0, 28.8, 31.0, 0.5),
        (0.1, [110.0, 184.7, 20.3], 974.9, 21.1, 29.34, 0.05),
        (0.9, [110.0, 170.0, 35.0], 1104.0, 0.0, 0.0, 0.5),
    ];
    for (alpha, g, nominal, reserve, shed, tol) in cases {
        let sol = rsced(alpha);
        assert_dispatch(&sol, g, tol);
        assert!((sol.costs.nominal - nominal).abs() <= tol.max(0.5), "alpha {alpha}: {}", sol.costs.nominal);
        assert!((sol.costs.reserve - reserve).abs() <= 0.05, "alpha {alpha}: {}", sol.costs.reserve);
        assert!((sol.total_shed() - shed).abs() <= 0.005, "alpha {alpha}: {}", sol.total_shed());
    }
}

#[test]
fn rsced_low_alpha_point_is_frozen() {
    // Exact optimum behind the rounded α = 0.1 row.
    let sol = rsced(0.1);
    assert_dispatch(&sol, [110.0, 184.671_052_631_578_9, 20.328_947_368_421_07], 1e-9);
    assert_abs_diff_eq!(sol.costs.total, 1093.83, epsilon = 5e-3);
}

#[test]
fn rsced_objective_decomposes() {
    let sol = rsced(0.0);
    let parts = sol.costs.nominal + sol.costs.reserve + sol.costs.cvar_term;
    assert_abs_diff_eq!(sol.costs.total, parts, epsilon = 1e-9);
    assert_abs_diff_eq!(sol.costs.total, 1084.0, epsilon = 1e-9);
}

#[test]
fn rsced_z_stationarity() {
    // z has unit cost; its stationarity row reads 1 − Σ ν̄_k − ζ = 0.
    let sol = rsced(0.9);
    let d = &sol.duals;
    assert_eq!(d.mu.len(), 6);
    assert_eq!(d.mu_se.len(), 3);
    assert_abs_diff_eq!(d.nu_hi_k.iter().sum::<f64>() + d.zeta, 1.0, epsilon = 1e-9);
}

#[test]
fn every_variant_certifies() {
    let (net, sc) = three_bus(0.1).unwrap();
    let forms = [
        Formulation::new(Variant::Ed),
        Formulation::new(Variant::Psced),
        Formulation::new(Variant::Csced),
        Formulation::rsced(0.0),
        Formulation::rsced(0.5),
    ];
    for form in forms {
        let kkt = solve_formulation(&net, &sc, &form).unwrap().kkt.unwrap();
        assert!(kkt.passes(KKT_TOLERANCE), "{:?}: {:?}", form.variant, kkt.violations.first());
    }
}

#[test]
fn builders_agree_with_formulation_dispatch() {
    let (net, sc) = three_bus(0.1).unwrap();
    let (lp, idx) = build_rsced(&net, &sc, 0.1).unwrap();
    let direct = solve_dispatch(&lp, &idx, 0.1).unwrap();
    assert_eq!(direct, rsced(0.1));
    assert_eq!(idx.first_stage, 1 + 3 * 3);
    assert_eq!(build_ed(&net).unwrap().1.n_scenarios, 0);
    assert_eq!(build_psced(&net, &sc, ContingencyLimit::Se).unwrap().1.da.len(), 3);
    assert!(build_csced(&net, &sc).unwrap().1.z.is_some());
}

#[test]
fn invalid_alpha_is_rejected() {
    let (net, sc) = three_bus(0.1).unwrap();
    for alpha in [1.0, -0.1, f64::NAN] {
        let err = solve_formulation(&net, &sc, &Formulation::rsced(alpha)).unwrap_err();
        assert!(matches!(err, Error::InvalidAlpha(_)));
    }
}

#[test]
fn shed_costs_add_up() {
    let (net, sc) = three_bus(0.1).unwrap();
    let sol = rsced(0.0);
    let dist = shed_distribution(&sol, &net, &sc);
    assert_eq!(dist.outcomes.len(), 4);
    assert_abs_diff_eq!(dist.outcomes.iter().map(|o| o.0).sum::<f64>(), 930.0, epsilon = 1e-9);
    assert_abs_diff_eq!(dist.outcomes[3].1, 0.7, epsilon = 1e-12);
}

#[test]
fn no_shed_gives_a_single_zero_outcome() {
    let (net, sc) = three_bus(0.1).unwrap();
    let dist = shed_distribution(&rsced(0.9), &net, &sc);
    assert!(dist.outcomes.iter().all(|o| o.0 == 0.0));
    assert_eq!(cvar(0.95, &dist).unwrap(), 0.0);
}

#[test]
fn cvar_evaluator_matches_the_epigraph() {
    let (net, sc) = three_bus(0.1).unwrap();
    for alpha in [0.0, 0.1, 0.5, 0.9] {
        let sol = rsced(alpha);
        let dist = shed_distribution(&sol, &net, &sc);
        assert_abs_diff_eq!(cvar(alpha, &dist).unwrap(), sol.costs.cvar_term, epsilon = 1e-6);
    }
}

#[test]
fn variant_costs_are_nested() {
    let (net, sc) = three_bus(0.1).unwrap();
    let ed = solve(&net, &sc, Variant::Ed).costs.total;
    let c = solve(&net, &sc, Variant::Csced).costs.nominal;
    let p = solve(&net, &sc, Variant::Psced).costs.nominal;
    assert!(ed <= c && c <= p, "{ed} {c} {p}");
}

#[test]
fn alpha_monotonicity_on_three_bus() {
    let mut prev: Option<DispatchSolution> = None;
    for step in 0..=19 {
        let alpha = step as f64 * 0.05;
        let sol = rsced(alpha);
        if let Some(p) = &prev {
            assert!(sol.total_shed() <= p.total_shed() + 1e-7, "alpha {alpha}");
            let cost = |s: &DispatchSolution| s.costs.nominal + s.costs.reserve;
            assert!(cost(&sol) >= cost(p) - 1e-7, "alpha {alpha}");
        }
        prev = Some(sol);
    }
}

#[test]
fn probability_response_at_high_alpha() {
    let (net, sc) = three_bus(0.1).unwrap();
    let mut prev: Option<DispatchSolution> = None;
    for step in 0..=30 {
        let mut probs = sc.probabilities();
        probs[1] = step as f64 * 0.01;
        let sc = sc.with_probabilities(&probs).unwrap();
        let sol = solve_formulation(&net, &sc, &Formulation::rsced(0.9)).unwrap();
        if let Some(p) = &prev {
            assert!(sol.costs.nominal >= p.costs.nominal - 1e-7);
            assert!(sol.total_shed() <= p.total_shed() + 1e-7);
        }
        prev = Some(sol);
    }
}

fn tail_average(alpha: f64, dist: &LoadShedDistribution) -> f64 {
    // Independent of the variational form: average the worst (1 − α) mass.
    let mut o = dist.outcomes.clone();
    o.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut remaining = 1.0 - alpha;
    let mut acc = 0.0;
    for (c, p) in o {
        let take = p.min(remaining);
        acc += take * c;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / (1.0 - alpha)
}

fn distribution() -> impl Strategy<Value = LoadShedDistribution> {
    prop::collection::vec((0.0f64..1000.0, 0.01f64..1.0), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|o| o.1).sum();
        let mut outcomes: Vec<(f64, f64)> = raw.iter().map(|&(c, p)| (c.round(), p / total)).collect();
        let rest: f64 = outcomes[1..].iter().map(|o| o.1).sum();
        outcomes[0].1 = 1.0 - rest;
        LoadShedDistribution::new(outcomes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cvar_is_monotone_and_bounded(dist in distribution(), a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (cvar(lo, &dist).unwrap(), cvar(hi, &dist).unwrap());
        prop_assert!(x <= y + 1e-9);
        prop_assert!(x >= dist.expectation() - 1e-9);
        prop_assert!(y <= dist.max() + 1e-9);
        prop_assert!((x - tail_average(lo, &dist)).abs() <= 1e-9 * (1.0 + x.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recourse_invariants(seed in 0u64..1000, n in 3usize..7, step in 0usize..10) {
        let alpha = step as f64 / 10.0;
        let (net, sc) = synthetic_feasible(&SyntheticConfig::new(n), seed).unwrap();
        let sol = solve_formulation(&net, &sc, &Formulation::rsced(alpha)).unwrap();
        prop_assert!(sol.kkt.as_ref().unwrap().passes(KKT_TOLERANCE));
        prop_assert!((sol.g.iter().sum::<f64>() - net.total_demand()).abs() <= 1e-6);
        let voll = net.voll();
        for k in 0..sc.len() {
            let balance: f64 = sol.dg[k].iter().chain(&sol.dd[k]).sum();
            prop_assert!(balance.abs() <= 1e-7);
            let cost: f64 = sol.dd[k].iter().zip(&voll).map(|(d, v)| d * v).sum();
            if sc.contingencies[k].probability > 0.0 {
                prop_assert!((sol.y[k] - (cost - sol.z).max(0.0)).abs() <= 1e-7 * (1.0 + cost));
            }
        }
    }
}
