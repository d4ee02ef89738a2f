//! Sweeps α on the 3-bus case through the CLI layer and prints the sweep
//! table as CSV.

use rsced::cli::case::{load_case, SolveConfig};
use rsced::cli::cmd_sweep;
use rsced::cli::report::{render_sweep, Format, SweepAxis};

fn main() -> rsced::Result<()> {
    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/case3_triangle.json"))?;
    let grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).chain([0.95]).collect();
    let table = cmd_sweep(&case, &SolveConfig::default(), SweepAxis::Alpha, &grid, None)?;
    print!("{}", render_sweep(&table, Format::Csv)?);
    Ok(())
}
