//! Solves the 3-bus R-SCED by Benders decomposition and directly, printing
//! the bound trace and both objectives.

use rsced::benders::{benders_solve, decompose, BendersOptions};
use rsced::cases::three_bus;
use rsced::model::{build_rsced, solve_dispatch};

fn main() -> rsced::Result<()> {
    let (net, sc) = three_bus(0.1)?;
    for alpha in [0.0, 0.5, 0.9] {
        let (lp, idx) = build_rsced(&net, &sc, alpha)?;
        let direct = solve_dispatch(&lp, &idx, alpha)?;
        let dec = decompose(&lp, &idx)?;
        let res = benders_solve(&dec, &BendersOptions::default())?;
        println!(
            "alpha {alpha}: monolithic {:.6}  benders {:.6}  iterations {}  ({:?})",
            direct.costs.total,
            res.objective,
            res.trace.iterations.len(),
            res.trace.termination.unwrap()
        );
        print!("{}", res.trace.to_csv()?);
    }
    Ok(())
}
