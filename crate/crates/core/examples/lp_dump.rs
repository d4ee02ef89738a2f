//! Writes the 3-bus R-SCED LP in LP-file form, e.g. to cross-check it with
//! an external solver.

use rsced::cases::three_bus;
use rsced::lp::write_lp;
use rsced::model::build_rsced;

fn main() -> rsced::Result<()> {
    let (net, sc) = three_bus(0.1)?;
    let (lp, _) = build_rsced(&net, &sc, 0.5)?;
    print!("{}", write_lp(&lp));
    Ok(())
}
