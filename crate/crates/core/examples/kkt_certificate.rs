//! Solves each dispatch variant on the 3-bus case and prints the KKT
//! residuals that certify the solution.

use rsced::cases::three_bus;
use rsced::model::{solve_formulation, Formulation, Variant};

fn main() -> rsced::Result<()> {
    let (net, sc) = three_bus(0.1)?;
    println!("{:<8} {:>10} {:>10} {:>10} {:>10} {:>10}", "variant", "objective", "primal", "dual", "stationary", "compl.");
    for form in [
        Formulation::new(Variant::Ed),
        Formulation::new(Variant::Psced),
        Formulation::new(Variant::Csced),
        Formulation::rsced(0.5),
    ] {
        let sol = solve_formulation(&net, &sc, &form)?;
        let k = sol.kkt.as_ref().expect("monolithic solves are certified");
        println!(
            "{:<8} {:>10.3} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e}",
            form.variant.name(),
            sol.costs.total,
            k.max_primal_residual,
            k.max_dual_residual,
            k.max_stationarity_residual,
            k.max_complementarity_residual
        );
    }
    Ok(())
}
