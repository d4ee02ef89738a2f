//! Settles the 3-bus R-SCED dispatch under N-LMP and S-LMP across α and
//! prints merchandising surplus and LOC uplift for each scheme.

use rsced::cases::three_bus;
use rsced::model::{solve_formulation, Formulation};
use rsced::pricing::theorem_audit;

fn main() -> rsced::Result<()> {
    let (net, sc) = three_bus(0.1)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}  S-LMP", "alpha", "MS[N]", "LOC[N]", "MS[S]", "LOC[S]");
    for step in 0..10 {
        let alpha = step as f64 / 10.0;
        let sol = solve_formulation(&net, &sc, &Formulation::rsced(alpha))?;
        let audit = theorem_audit(&net, &sc, &sol)?;
        let s: Vec<String> = audit.slmp.prices.values.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "{alpha:>5.1} {:>10.3} {:>10.3} {:>10.3} {:>10.3}  [{}]",
            audit.nlmp.ms,
            audit.nlmp.total_loc,
            audit.slmp.ms,
            audit.slmp.total_loc,
            s.join(", ")
        );
    }
    Ok(())
}
