//! Grid data model and DC sensitivities.
//!
//! Line flows are directed: an ISF matrix has `2ℓ` rows, the first `ℓ` give
//! the from→to flow of each line per unit injection (withdrawn at the slack
//! bus) and the last `ℓ` are their negations. Matching limit vectors stack
//! the thermal ratings twice in the same order.
//!
//! ISF entries depend on the slack bus; prices and settlement quantities
//! computed from an optimal dispatch do not.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Capacity placed on rows of lines that are out of service.
pub const OPEN_LINE_LIMIT: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    /// MW
    pub demand: f64,
    /// Value of lost load, $/MWh.
    pub voll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: usize,
    pub from_bus: usize,
    pub to_bus: usize,
    /// p.u.
    pub reactance: f64,
    /// MW, applies in both directions.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub bus: usize,
    /// $/MWh
    pub cost: f64,
    pub gmin: f64,
    pub gmax: f64,
    pub reserve_cost_up: f64,
    pub reserve_cost_down: f64,
    pub reserve_cap_up: f64,
    pub reserve_cap_down: f64,
    /// Upper bound on load shed at this bus. Defaults to the bus demand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_shed_cap: Option<f64>,
}

impl GeneratorSpec {
    /// A bus with no generation: `gmin = gmax = 0`, no reserves.
    pub fn empty(bus: usize) -> Self {
        Self {
            bus,
            cost: 0.0,
            gmin: 0.0,
            gmax: 0.0,
            reserve_cost_up: 0.0,
            reserve_cost_down: 0.0,
            reserve_cap_up: 0.0,
            reserve_cap_down: 0.0,
            load_shed_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    /// Exactly one entry per bus, ordered by bus id.
    pub generators: Vec<GeneratorSpec>,
    pub slack_bus: usize,
}

impl Network {
    /// Validates the grid and fills in empty generators for buses that have none.
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        generators: Vec<GeneratorSpec>,
        slack_bus: usize,
    ) -> Result<Self> {
        let n = buses.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no buses".into()));
        }
        for (i, bus) in buses.iter().enumerate() {
            if bus.id != i {
                return Err(Error::InvalidNetwork(format!(
                    "bus ids must be contiguous from 0; position {i} holds id {}",
                    bus.id
                )));
            }
            if !(bus.demand >= 0.0 && bus.demand.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "bus {i} has invalid demand {}",
                    bus.demand
                )));
            }
            if !(bus.voll >= 0.0 && bus.voll.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "bus {i} has invalid VoLL {}",
                    bus.voll
                )));
            }
        }
        for (i, line) in lines.iter().enumerate() {
            if line.id != i {
                return Err(Error::InvalidNetwork(format!(
                    "line ids must be contiguous from 0; position {i} holds id {}",
                    line.id
                )));
            }
            if line.from_bus >= n || line.to_bus >= n {
                return Err(Error::InvalidNetwork(format!(
                    "line {i} references a bus outside 0..{n}"
                )));
            }
            if line.from_bus == line.to_bus {
                return Err(Error::InvalidNetwork(format!("line {i} is a self loop")));
            }
            if !(line.reactance > 0.0 && line.reactance.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "line {i} has non-positive reactance {}",
                    line.reactance
                )));
            }
            if !(line.capacity > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "line {i} has non-positive capacity {}",
                    line.capacity
                )));
            }
        }
        if slack_bus >= n {
            return Err(Error::InvalidNetwork(format!(
                "slack bus {slack_bus} is not a bus id"
            )));
        }

        let mut slots: Vec<Option<GeneratorSpec>> = vec![None; n];
        for gen in generators {
            if gen.bus >= n {
                return Err(Error::InvalidNetwork(format!(
                    "generator references unknown bus {}",
                    gen.bus
                )));
            }
            if slots[gen.bus].is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "bus {} has more than one generator",
                    gen.bus
                )));
            }
            let nonneg = [
                ("cost", gen.cost),
                ("reserve_cost_up", gen.reserve_cost_up),
                ("reserve_cost_down", gen.reserve_cost_down),
                ("reserve_cap_up", gen.reserve_cap_up),
                ("reserve_cap_down", gen.reserve_cap_down),
                ("load_shed_cap", gen.load_shed_cap.unwrap_or(0.0)),
            ];
            for (name, value) in nonneg {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(Error::InvalidNetwork(format!(
                        "generator at bus {} has invalid {name} {value}",
                        gen.bus
                    )));
                }
            }
            if !(gen.gmin <= gen.gmax) || !gen.gmin.is_finite() || !gen.gmax.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "generator at bus {} has gmin {} > gmax {}",
                    gen.bus, gen.gmin, gen.gmax
                )));
            }
            let bus = gen.bus;
            slots[bus] = Some(gen);
        }
        let generators = slots
            .into_iter()
            .enumerate()
            .map(|(bus, g)| g.unwrap_or_else(|| GeneratorSpec::empty(bus)))
            .collect();

        let network = Self {
            buses,
            lines,
            generators,
            slack_bus,
        };
        if !network.is_connected_without(&BTreeSet::new()) {
            return Err(Error::InvalidNetwork("network graph is not connected".into()));
        }
        Ok(network)
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn demand(&self) -> Vec<f64> {
        self.buses.iter().map(|b| b.demand).collect()
    }

    pub fn voll(&self) -> Vec<f64> {
        self.buses.iter().map(|b| b.voll).collect()
    }

    pub fn cost(&self) -> Vec<f64> {
        self.generators.iter().map(|g| g.cost).collect()
    }

    pub fn gmin(&self) -> Vec<f64> {
        self.generators.iter().map(|g| g.gmin).collect()
    }

    pub fn gmax(&self) -> Vec<f64> {
        self.generators.iter().map(|g| g.gmax).collect()
    }

    /// Per-bus cap on load shed (`Δ_d`), falling back to the bus demand.
    pub fn load_shed_cap(&self) -> Vec<f64> {
        self.generators
            .iter()
            .zip(&self.buses)
            .map(|(g, b)| g.load_shed_cap.unwrap_or(b.demand))
            .collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.buses.iter().map(|b| b.demand).sum()
    }

    /// Returns a copy with a different slack bus.
    pub fn with_slack(&self, slack_bus: usize) -> Result<Self> {
        if slack_bus >= self.n_buses() {
            return Err(Error::InvalidNetwork(format!(
                "slack bus {slack_bus} is not a bus id"
            )));
        }
        let mut net = self.clone();
        net.slack_bus = slack_bus;
        Ok(net)
    }

    pub fn is_connected_without(&self, removed: &BTreeSet<usize>) -> bool {
        let n = self.n_buses();
        let mut adj = vec![Vec::new(); n];
        for line in self.lines.iter().filter(|l| !removed.contains(&l.id)) {
            adj[line.from_bus].push(line.to_bus);
            adj[line.to_bus].push(line.from_bus);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}

/// Directed ISF matrix (`2ℓ × n`) of the network with `removed_lines` out of service.
pub fn build_isf(network: &Network, removed_lines: &BTreeSet<usize>) -> Result<DMatrix<f64>> {
    let n = network.n_buses();
    let l = network.n_lines();
    if let Some(&bad) = removed_lines.iter().find(|&&id| id >= l) {
        return Err(Error::InvalidContingency(format!("line {bad} does not exist")));
    }
    if !network.is_connected_without(removed_lines) {
        return Err(Error::IslandedNetwork {
            lines: removed_lines.iter().copied().collect(),
        });
    }

    let slack = network.slack_bus;
    // reduced index: bus -> position in the slack-free system
    let reduced: Vec<Option<usize>> = (0..n)
        .map(|i| match i.cmp(&slack) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();

    let mut b = DMatrix::<f64>::zeros(n - 1, n - 1);
    for line in network.lines.iter().filter(|l| !removed_lines.contains(&l.id)) {
        let y = 1.0 / line.reactance;
        let (f, t) = (reduced[line.from_bus], reduced[line.to_bus]);
        if let Some(f) = f {
            b[(f, f)] += y;
        }
        if let Some(t) = t {
            b[(t, t)] += y;
        }
        if let (Some(f), Some(t)) = (f, t) {
            b[(f, t)] -= y;
            b[(t, f)] -= y;
        }
    }
    let x = if n > 1 {
        b.lu().try_inverse().ok_or(Error::SingularMatrix)?
    } else {
        b
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }

    // angle sensitivity of bus i to injection at bus j; slack row/column zero
    let angle = |i: usize, j: usize| -> f64 {
        match (reduced[i], reduced[j]) {
            (Some(a), Some(b)) => x[(a, b)],
            _ => 0.0,
        }
    };

    let mut h = DMatrix::<f64>::zeros(2 * l, n);
    for line in network.lines.iter().filter(|l| !removed_lines.contains(&l.id)) {
        for j in 0..n {
            let v = (angle(line.from_bus, j) - angle(line.to_bus, j)) / line.reactance;
            h[(line.id, j)] = v;
            h[(l + line.id, j)] = -v;
        }
    }
    Ok(h)
}

/// Stacked `[f; f]` scaled by `multiplier`.
pub fn directed_limits(network: &Network, multiplier: f64) -> Vec<f64> {
    let one_way: Vec<f64> = network.lines.iter().map(|l| l.capacity * multiplier).collect();
    one_way.iter().chain(one_way.iter()).copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contingency {
    pub id: usize,
    pub removed_lines: BTreeSet<usize>,
    pub probability: f64,
    pub da_multiplier: f64,
    pub se_multiplier: f64,
}

impl Contingency {
    fn validate(&self, network: &Network) -> Result<()> {
        if self.removed_lines.is_empty() {
            return Err(Error::InvalidContingency(format!(
                "contingency {} removes no lines",
                self.id
            )));
        }
        if !(0.0..1.0).contains(&self.probability) {
            return Err(Error::InvalidContingency(format!(
                "contingency {} has probability {} outside [0, 1)",
                self.id, self.probability
            )));
        }
        if !(self.se_multiplier >= 1.0 && self.da_multiplier >= self.se_multiplier) {
            return Err(Error::InvalidContingency(format!(
                "contingency {} needs da_multiplier >= se_multiplier >= 1 (got {}, {})",
                self.id, self.da_multiplier, self.se_multiplier
            )));
        }
        if let Some(&bad) = self.removed_lines.iter().find(|&&id| id >= network.n_lines()) {
            return Err(Error::InvalidContingency(format!(
                "contingency {} removes unknown line {bad}",
                self.id
            )));
        }
        Ok(())
    }
}

/// Contingencies with their post-outage ISF matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub contingencies: Vec<Contingency>,
    /// `isf[k]` is `H_k`; rows of removed lines are zero.
    pub isf: Vec<DMatrix<f64>>,
    pub nominal_isf: DMatrix<f64>,
    pub warnings: Vec<String>,
}

impl ScenarioSet {
    pub fn new(network: &Network, contingencies: Vec<Contingency>) -> Result<Self> {
        for (k, c) in contingencies.iter().enumerate() {
            if c.id != k {
                return Err(Error::InvalidContingency(format!(
                    "contingency ids must be contiguous from 0; position {k} holds id {}",
                    c.id
                )));
            }
            c.validate(network)?;
        }
        check_mass(contingencies.iter().map(|c| c.probability))?;
        let nominal_isf = build_isf(network, &BTreeSet::new())?;
        let isf = contingencies
            .par_iter()
            .map(|c| build_isf(network, &c.removed_lines))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            contingencies,
            isf,
            nominal_isf,
            warnings: Vec::new(),
        })
    }

    /// No contingencies at all.
    pub fn empty(network: &Network) -> Result<Self> {
        Self::new(network, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.contingencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contingencies.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.contingencies.iter().map(|c| c.probability).collect()
    }

    /// Same outages and ISF matrices with new scenario probabilities.
    pub fn with_probabilities(&self, probabilities: &[f64]) -> Result<Self> {
        if probabilities.len() != self.len() {
            return Err(Error::InvalidContingency(format!(
                "expected {} probabilities, got {}",
                self.len(),
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::InvalidContingency(format!(
                "probability {p} outside [0, 1)"
            )));
        }
        check_mass(probabilities.iter().copied())?;
        let mut out = self.clone();
        for (c, &p) in out.contingencies.iter_mut().zip(probabilities) {
            c.probability = p;
        }
        Ok(out)
    }

    fn limits(&self, network: &Network, k: usize, multiplier: f64) -> Vec<f64> {
        let l = network.n_lines();
        let mut f = directed_limits(network, multiplier);
        for &line in &self.contingencies[k].removed_lines {
            f[line] = OPEN_LINE_LIMIT;
            f[l + line] = OPEN_LINE_LIMIT;
        }
        f
    }

    /// Drastic-action limits `f_k^DA`, infinite on removed lines.
    pub fn da_limits(&self, network: &Network, k: usize) -> Vec<f64> {
        self.limits(network, k, self.contingencies[k].da_multiplier)
    }

    /// Short-term emergency limits `f_k^SE`, infinite on removed lines.
    pub fn se_limits(&self, network: &Network, k: usize) -> Vec<f64> {
        self.limits(network, k, self.contingencies[k].se_multiplier)
    }

    /// Nominal ratings with removed lines opened.
    pub fn nominal_limits(&self, network: &Network, k: usize) -> Vec<f64> {
        self.limits(network, k, 1.0)
    }
}

fn check_mass(probabilities: impl Iterator<Item = f64>) -> Result<()> {
    let total: f64 = probabilities.sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::ProbabilityMassExceeded { total });
    }
    Ok(())
}

/// One contingency per single-line outage that keeps the grid connected.
/// Bridge lines are skipped and noted in `warnings`.
pub fn all_single_line_contingencies(
    network: &Network,
    probability: f64,
    da_multiplier: f64,
    se_multiplier: f64,
) -> Result<ScenarioSet> {
    let mut warnings = Vec::new();
    let mut contingencies = Vec::new();
    for line in &network.lines {
        let removed = BTreeSet::from([line.id]);
        if !network.is_connected_without(&removed) {
            let msg = format!(
                "line {} ({}-{}) is a bridge; its outage islands the network and is skipped",
                line.id, line.from_bus, line.to_bus
            );
            log::warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        contingencies.push(Contingency {
            id: contingencies.len(),
            removed_lines: removed,
            probability,
            da_multiplier,
            se_multiplier,
        });
    }
    let mut set = ScenarioSet::new(network, contingencies)?;
    set.warnings = warnings;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bus(id: usize, demand: f64) -> Bus {
        Bus {
            id,
            demand,
            voll: 30.0,
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

    fn triangle() -> Network {
        Network::new(
            vec![bus(0, 110.0), bus(1, 110.0), bus(2, 95.0)],
            vec![
                line(0, 0, 1, 0.62, 9000.0),
                line(1, 0, 2, 0.9, 9000.0),
                line(2, 1, 2, 0.75, 50.0),
            ],
            vec![],
            0,
        )
        .unwrap()
    }

    /// Independent route: solve B θ = x with θ_slack = 0 by Gaussian
    /// elimination, then flow = Δθ / X.
    fn angle_flows(net: &Network, removed: &BTreeSet<usize>, injection: &[f64]) -> Vec<f64> {
        let n = net.n_buses();
        let mut b = vec![vec![0.0; n]; n];
        for l in net.lines.iter().filter(|l| !removed.contains(&l.id)) {
            let y = 1.0 / l.reactance;
            b[l.from_bus][l.from_bus] += y;
            b[l.to_bus][l.to_bus] += y;
            b[l.from_bus][l.to_bus] -= y;
            b[l.to_bus][l.from_bus] -= y;
        }
        let s = net.slack_bus;
        let idx: Vec<usize> = (0..n).filter(|&i| i != s).collect();
        let m = idx.len();
        let mut a: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| {
                let mut row: Vec<f64> = idx.iter().map(|&j| b[i][j]).collect();
                row.push(injection[i]);
                row
            })
            .collect();
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
                .unwrap();
            a.swap(c, p);
            for r in 0..m {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=m {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let mut theta = vec![0.0; n];
        for (r, &i) in idx.iter().enumerate() {
            theta[i] = a[r][m] / a[r][r];
        }
        let l = net.n_lines();
        let mut flows = vec![0.0; 2 * l];
        for ln in net.lines.iter().filter(|ln| !removed.contains(&ln.id)) {
            let f = (theta[ln.from_bus] - theta[ln.to_bus]) / ln.reactance;
            flows[ln.id] = f;
            flows[l + ln.id] = -f;
        }
        flows
    }

    #[test]
    fn two_bus_isf() {
        let net = Network::new(
            vec![bus(0, 0.0), bus(1, 0.0)],
            vec![line(0, 0, 1, 0.5, 10.0)],
            vec![],
            0,
        )
        .unwrap();
        let h = build_isf(&net, &BTreeSet::new()).unwrap();
        assert_eq!(h.shape(), (2, 2));
        assert_abs_diff_eq!(h[(0, 1)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h[(1, 1)], 1.0, epsilon = 1e-12);
        assert_eq!(h[(0, 0)], 0.0);
    }

    #[test]
    fn triangle_isf_matches_angle_solve() {
        let net = triangle();
        let h = build_isf(&net, &BTreeSet::new()).unwrap();
        for j in 0..3 {
            let mut x = vec![0.0; 3];
            x[j] += 1.0;
            x[net.slack_bus] -= 1.0;
            let oracle = angle_flows(&net, &BTreeSet::new(), &x);
            for r in 0..6 {
                assert_abs_diff_eq!(h[(r, j)], oracle[r], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn series_path_after_outage() {
        let net = triangle();
        let h = build_isf(&net, &BTreeSet::from([2])).unwrap();
        // +1 at bus 1, withdrawn at slack bus 0: all of it returns over line 0
        let flows: Vec<f64> = (0..6).map(|r| h[(r, 1)]).collect();
        assert_abs_diff_eq!(flows[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flows[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flows[1], 0.0, epsilon = 1e-12);
        assert_eq!(flows[2], 0.0);
        assert_eq!(flows[5], 0.0);
    }

    #[test]
    fn islanding_is_rejected() {
        let net = Network::new(
            vec![bus(0, 0.0), bus(1, 0.0), bus(2, 0.0)],
            vec![line(0, 0, 1, 0.1, 10.0), line(1, 1, 2, 0.1, 10.0)],
            vec![],
            0,
        )
        .unwrap();
        assert!(matches!(
            build_isf(&net, &BTreeSet::from([1])),
            Err(Error::IslandedNetwork { .. })
        ));
        let set = all_single_line_contingencies(&net, 0.1, 1.8, 1.2).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.warnings.len(), 2);
    }

    #[test]
    fn single_line_set_on_triangle() {
        let net = triangle();
        let set = all_single_line_contingencies(&net, 0.1, 1.8, 1.2).unwrap();
        assert_eq!(set.len(), 3);
        assert_abs_diff_eq!(set.probabilities().iter().sum::<f64>(), 0.3, epsilon = 1e-12);
        assert!(matches!(
            all_single_line_contingencies(&net, 0.4, 1.8, 1.2),
            Err(Error::ProbabilityMassExceeded { .. })
        ));
    }

    #[test]
    fn limits_scale_and_open_removed_lines() {
        let net = triangle();
        let da = directed_limits(&net, 1.8);
        assert_abs_diff_eq!(da[2], 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(da[5], 90.0, epsilon = 1e-12);
        assert_eq!(directed_limits(&net, 1.0), vec![9000.0, 9000.0, 50.0, 9000.0, 9000.0, 50.0]);
        let se = directed_limits(&net, 1.2);
        assert_abs_diff_eq!(se[2], 60.0, epsilon = 1e-12);

        let set = all_single_line_contingencies(&net, 0.1, 1.8, 1.2).unwrap();
        let f0 = set.se_limits(&net, 0);
        assert!(f0[0].is_infinite() && f0[3].is_infinite());
        assert_abs_diff_eq!(f0[2], 60.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(Network::new(vec![bus(0, -5.0)], vec![], vec![], 0).is_err());
        assert!(Network::new(
            vec![bus(0, 1.0), bus(1, 1.0)],
            vec![line(0, 0, 1, 0.0, 10.0)],
            vec![],
            0
        )
        .is_err());
        // disconnected
        assert!(Network::new(vec![bus(0, 1.0), bus(1, 1.0)], vec![], vec![], 0).is_err());
        assert!(Network::new(vec![bus(0, 1.0)], vec![], vec![], 3).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_network() -> impl Strategy<Value = (Network, Vec<f64>)> {
            (3usize..8).prop_flat_map(|n| {
                let extra = proptest::collection::vec((0..n, 0..n, 0.05f64..1.0), 0..n);
                let tree = proptest::collection::vec(0.05f64..1.0, n - 1);
                let inj = proptest::collection::vec(-5.0f64..5.0, n);
                (Just(n), tree, extra, inj, 0..n)
            })
            .prop_map(|(n, tree, extra, mut inj, slack)| {
                let mut lines = Vec::new();
                for (i, x) in tree.into_iter().enumerate() {
                    lines.push(line(lines.len(), i, i + 1, x, 10.0));
                }
                for (a, b, x) in extra {
                    if a != b {
                        lines.push(line(lines.len(), a, b, x, 10.0));
                    }
                }
                let mean = inj.iter().sum::<f64>() / n as f64;
                inj.iter_mut().for_each(|v| *v -= mean);
                let buses = (0..n).map(|i| bus(i, 1.0)).collect();
                (Network::new(buses, lines, vec![], slack).unwrap(), inj)
            })
        }

        proptest! {
            #[test]
            fn isf_structure_and_flows((net, inj) in random_network()) {
                let l = net.n_lines();
                let mut removal_sets = vec![BTreeSet::new()];
                for id in 0..l {
                    let r = BTreeSet::from([id]);
                    if net.is_connected_without(&r) {
                        removal_sets.push(r);
                    }
                }
                for removed in removal_sets {
                    let h = build_isf(&net, &removed).unwrap();
                    for r in 0..l {
                        prop_assert!(h[(r, net.slack_bus)].abs() <= 1e-12);
                        for j in 0..net.n_buses() {
                            prop_assert!((h[(l + r, j)] + h[(r, j)]).abs() <= 1e-12);
                        }
                    }
                    let flows = &h * nalgebra::DVector::from_column_slice(&inj);
                    let oracle = angle_flows(&net, &removed, &inj);
                    for r in 0..2 * l {
                        prop_assert!((flows[r] - oracle[r]).abs() <= 1e-9);
                    }
                }
            }

            #[test]
            fn contingency_path_equals_rebuilt_network((net, _inj) in random_network()) {
                let set = all_single_line_contingencies(&net, 0.0, 1.8, 1.2).unwrap();
                for c in &set.contingencies {
                    let id = *c.removed_lines.iter().next().unwrap();
                    // rebuild without the line, then re-insert a zero row at its slot
                    let mut lines: Vec<Line> = net.lines.iter().filter(|l| l.id != id).cloned().collect();
                    for (i, ln) in lines.iter_mut().enumerate() { ln.id = i; }
                    let reduced = Network::new(net.buses.clone(), lines, vec![], net.slack_bus).unwrap();
                    let hr = build_isf(&reduced, &BTreeSet::new()).unwrap();
                    let hk = &set.isf[c.id];
                    let l = net.n_lines();
                    for r in 0..l {
                        for j in 0..net.n_buses() {
                            let expected = match r.cmp(&id) {
                                std::cmp::Ordering::Less => hr[(r, j)],
                                std::cmp::Ordering::Equal => 0.0,
                                std::cmp::Ordering::Greater => hr[(r - 1, j)],
                            };
                            prop_assert!((hk[(r, j)] - expected).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }
}
