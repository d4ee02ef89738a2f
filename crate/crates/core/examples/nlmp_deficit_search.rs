//! Searches seeded synthetic networks for a dispatch whose N-LMP settlement
//! runs a deficit (negative merchandising surplus), sweeping α upward.
//!
//! `cargo run --example nlmp_deficit_search -- [buses] [seeds]`

use rsced::cases::{synthetic_feasible, SyntheticConfig};
use rsced::model::{solve_formulation, Formulation};
use rsced::pricing::theorem_audit;

fn main() -> rsced::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let buses = args.next().unwrap_or(4) as usize;
    let seeds = args.next().unwrap_or(50);
    let cfg = SyntheticConfig::new(buses);
    for seed in 0..seeds {
        let (net, sc) = synthetic_feasible(&cfg, seed)?;
        let mut row = Vec::new();
        for step in 0..10 {
            let alpha = step as f64 / 10.0;
            let sol = solve_formulation(&net, &sc, &Formulation::rsced(alpha))?;
            let audit = theorem_audit(&net, &sc, &sol)?;
            row.push((alpha, audit.nlmp.ms, audit.slmp.ms));
        }
        if let Some(first) = row.iter().find(|r| r.1 < -1e-3) {
            println!("seed {seed}: MS[N] < 0 from alpha = {:.1}", first.0);
            for (a, n, s) in &row {
                println!("  alpha {a:.1}  MS[N] {n:>10.3}  MS[S] {s:>10.3}");
            }
        }
    }
    Ok(())
}
