//! Raises the outage probability of line 1-3 on the 3-bus case and shows
//! where the nominal dispatch cost starts to rise for a risk-neutral and a
//! risk-averse operator.

use rsced::cases::three_bus;
use rsced::model::{solve_formulation, Formulation};

fn main() -> rsced::Result<()> {
    let (net, sc) = three_bus(0.1)?;
    let base = sc.probabilities();
    println!("{:>6} {:>12} {:>10} {:>12} {:>10}", "p", "nominal a=0", "shed a=0", "nominal a=.9", "shed a=.9");
    for i in 0..=12 {
        let p = i as f64 * 0.02;
        let mut probs = base.clone();
        probs[1] = p;
        let sc = sc.with_probabilities(&probs)?;
        let neutral = solve_formulation(&net, &sc, &Formulation::rsced(0.0))?;
        let averse = solve_formulation(&net, &sc, &Formulation::rsced(0.9))?;
        println!(
            "{p:>6.2} {:>12.2} {:>10.2} {:>12.2} {:>10.2}",
            neutral.costs.nominal,
            neutral.total_shed(),
            averse.costs.nominal,
            averse.total_shed()
        );
    }
    Ok(())
}
