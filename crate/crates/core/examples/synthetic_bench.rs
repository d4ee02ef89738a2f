//! Benchmarks monolithic and Benders solves on a generated network.
//! Usage: `cargo run --release --example synthetic_bench -- [buses] [seed]`.

use rsced::cli::case::{Method, SolveConfig};
use rsced::cli::report::{render_bench, Format};
use rsced::cli::{cmd_bench, resolve_case};

fn main() -> rsced::Result<()> {
    let mut args = std::env::args().skip(1);
    let buses: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let case = resolve_case(&format!("synthetic:{buses}"), seed)?;
    let table = cmd_bench(&case, &SolveConfig::default(), &[Method::Monolithic, Method::Benders], &[0.0, 0.5, 0.9])?;
    print!("{}", render_bench(&table, Format::Table)?);
    Ok(())
}
