//! Writes the bundled case files, then reloads each one to confirm it
//! round-trips through the JSON schema.
//!
//! `cargo run --example case_files -- [dir]` (default `fixtures`)

use std::path::PathBuf;

use rsced::cases::{self, SyntheticConfig, DA_MULTIPLIER, SE_MULTIPLIER};
use rsced::cli::case::{Probabilities, ScenarioMode};
use rsced::cli::{load_case, CaseFile, ScenarioConfig};

fn single_lines(p: f64) -> ScenarioConfig {
    ScenarioConfig {
        mode: ScenarioMode::AllSingleLines,
        probabilities: Probabilities::Uniform(p),
        da_multiplier: DA_MULTIPLIER,
        se_multiplier: SE_MULTIPLIER,
        contingencies: Vec::new(),
    }
}

fn main() -> rsced::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;

    let (three, _) = cases::three_bus(0.1)?;
    let (two, _) = cases::two_bus_congested()?;
    let cfg = SyntheticConfig::new(4);
    let (deficit, sc) = cases::synthetic_feasible(&cfg, 5)?;
    let p = sc.contingencies[0].probability;

    let files = [
        ("case3_triangle.json", CaseFile::from_network(&three, single_lines(0.1), Some("case3_triangle".into()))),
        ("case2_congested.json", CaseFile::from_network(&two, single_lines(0.0), Some("case2_congested".into()))),
        ("nlmp_deficit.json", CaseFile::from_network(&deficit, single_lines(p), Some("nlmp_deficit".into()))),
    ];
    for (name, file) in files {
        let path = dir.join(name);
        std::fs::write(&path, file.to_json() + "\n")?;
        let back = load_case(&path)?;
        assert_eq!(back.file, file, "{name} does not round-trip");
        println!(
            "{}: {} buses, {} lines, {} scenarios",
            path.display(),
            back.network.n_buses(),
            back.network.n_lines(),
            back.scenarios.len()
        );
    }
    Ok(())
}
