//! Built-in test networks: the calibrated 3-bus triangle, a 2-bus
//! congestion case, and a seeded ring-plus-chords generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{solve_formulation, Formulation};
use crate::network::{all_single_line_contingencies, Bus, GeneratorSpec, Line, Network, ScenarioSet};

/// Reserve price as a multiple of the energy price.
pub const RESERVE_COST_FACTOR: f64 = 1.2;
pub const DA_MULTIPLIER: f64 = 1.8;
pub const SE_MULTIPLIER: f64 = 1.2;

fn generator(bus: usize, cost: f64, gmax: f64, reserve_cap: f64) -> GeneratorSpec {
    GeneratorSpec {
        bus,
        cost,
        gmin: 0.0,
        gmax,
        reserve_cost_up: RESERVE_COST_FACTOR * cost,
        reserve_cost_down: RESERVE_COST_FACTOR * cost,
        reserve_cap_up: reserve_cap,
        reserve_cap_down: reserve_cap,
        load_shed_cap: None,
    }
}

fn line(id: usize, from_bus: usize, to_bus: usize, reactance: f64, capacity: f64) -> Line {
    Line {
        id,
        from_bus,
        to_bus,
        reactance,
        capacity,
    }
}

/// The 3-bus triangle with a 50 MW bottleneck on line 1-2 (0-based),
/// generation limits [0, 200] MW and 20 MW reserve caps.
pub fn three_bus_network() -> Network {
    let buses = [110.0, 110.0, 95.0]
        .iter()
        .enumerate()
        .map(|(id, &demand)| Bus { id, demand, voll: 30.0 })
        .collect();
    let lines = vec![
        line(0, 0, 1, 0.9, 9000.0),
        line(1, 0, 2, 0.62, 9000.0),
        line(2, 1, 2, 0.75, 50.0),
    ];
    let gens = vec![
        generator(0, 5.0, 200.0, 20.0),
        generator(1, 1.2, 200.0, 20.0),
        generator(2, 10.0, 200.0, 20.0),
    ];
    Network::new(buses, lines, gens, 0).expect("three-bus data is valid")
}

/// Three-bus network with every single-line outage at probability `p`.
pub fn three_bus(p: f64) -> Result<(Network, ScenarioSet)> {
    let net = three_bus_network();
    let sc = all_single_line_contingencies(&net, p, DA_MULTIPLIER, SE_MULTIPLIER)?;
    Ok((net, sc))
}

/// Cheap generator at bus 0 feeding 100 MW at bus 1 over a 60 MW line.
/// ED clears at 10 and 30 $/MWh with a congestion rent of 1200 $/h.
pub fn two_bus_congested() -> Result<(Network, ScenarioSet)> {
    let buses = vec![
        Bus { id: 0, demand: 0.0, voll: 1000.0 },
        Bus { id: 1, demand: 100.0, voll: 1000.0 },
    ];
    let lines = vec![line(0, 0, 1, 0.5, 60.0)];
    let gens = vec![generator(0, 10.0, 200.0, 0.0), generator(1, 30.0, 200.0, 0.0)];
    let net = Network::new(buses, lines, gens, 0)?;
    let sc = ScenarioSet::empty(&net)?;
    Ok((net, sc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub buses: usize,
    /// Extra lines on top of the ring.
    pub chords: usize,
    /// Per-scenario outage probability; capped so the total stays below 1.
    pub probability: f64,
}

impl SyntheticConfig {
    pub fn new(buses: usize) -> Self {
        SyntheticConfig {
            buses,
            chords: buses / 3,
            probability: 0.05,
        }
    }
}

fn draw(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<(Network, ScenarioSet)> {
    let n = cfg.buses.max(2);
    let buses: Vec<Bus> = (0..n)
        .map(|id| Bus {
            id,
            demand: if rng.gen_bool(0.7) { rng.gen_range(10.0..100.0f64).round() } else { 0.0 },
            voll: rng.gen_range(50.0..500.0f64).round(),
        })
        .collect();
    let total: f64 = buses.iter().map(|b| b.demand).sum();
    let mut lines = Vec::new();
    let ring = if n == 2 { 1 } else { n };
    for i in 0..ring {
        lines.push(line(i, i, (i + 1) % n, rng.gen_range(0.1..1.0), 0.0));
    }
    let mut attempts = 0;
    while lines.len() < ring + cfg.chords && attempts < 50 * (cfg.chords + 1) && n > 3 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let adjacent = (a + 1) % n == b || (b + 1) % n == a;
        let dup = lines.iter().any(|l| (l.from_bus, l.to_bus) == (a, b) || (l.from_bus, l.to_bus) == (b, a));
        if a != b && !adjacent && !dup {
            lines.push(line(lines.len(), a, b, rng.gen_range(0.1..1.0), 0.0));
        }
    }
    let typical = (total / n as f64).max(10.0);
    for l in &mut lines {
        l.capacity = (typical * rng.gen_range(0.6..3.0)).round().max(5.0);
    }
    let mut gens = Vec::new();
    for bus in 0..n {
        if bus == 0 || rng.gen_bool(0.6) {
            let gmax = (total * rng.gen_range(0.3..0.9)).round().max(20.0);
            let mut g = generator(bus, rng.gen_range(1.0..40.0f64).round(), gmax, (gmax * rng.gen_range(0.05..0.3)).round());
            g.reserve_cost_up = (g.cost * rng.gen_range(0.2..1.5) * 100.0).round() / 100.0;
            g.reserve_cost_down = (g.cost * rng.gen_range(0.2..1.5) * 100.0).round() / 100.0;
            gens.push(g);
        }
    }
    let net = Network::new(buses, lines, gens, 0)?;
    let bridges_free = net.n_lines();
    let p = cfg.probability.min(0.95 / bridges_free.max(1) as f64);
    let sc = all_single_line_contingencies(&net, p, DA_MULTIPLIER, SE_MULTIPLIER)?;
    Ok((net, sc))
}

/// Seeded random ring-plus-chords case whose R-SCED (α = 0) and C-SCED
/// problems may or may not be feasible; see [`synthetic_feasible`].
pub fn synthetic(cfg: &SyntheticConfig, seed: u64) -> Result<(Network, ScenarioSet)> {
    draw(cfg, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Redraws from the seed's stream until the R-SCED problem is feasible.
pub fn synthetic_feasible(cfg: &SyntheticConfig, seed: u64) -> Result<(Network, ScenarioSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (net, sc) = draw(cfg, &mut rng)?;
        if solve_formulation(&net, &sc, &Formulation::rsced(0.0)).is_ok() {
            return Ok((net, sc));
        }
    }
}
