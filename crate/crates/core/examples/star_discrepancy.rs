//! Exact star discrepancy, L2 discrepancy and a Monte Carlo Lq estimate.

use qmc_quality::discrepancy::{l2_star_discrepancy, lq_discrepancy_mc, star_discrepancy_exact};
use qmc_quality::pointgen::{fibonacci_set, random_uniform};
use qmc_quality::Result;

fn main() -> Result<()> {
    for n in [8, 10, 12] {
        let set = fibonacci_set(n)?;
        let star = star_discrepancy_exact(&set)?;
        println!(
            "fibonacci m={:4}  D*={:.6}  L2*={:.6}  witness {:?}",
            set.len(),
            star.value,
            l2_star_discrepancy(&set)?,
            star.witness
        );
    }
    let random = random_uniform(144, 2, 1)?;
    let lq = lq_discrepancy_mc(&random, 4.0, 20_000, 2)?;
    println!("random m=144  D*={:.6}  L4~{:?}", star_discrepancy_exact(&random)?.value, lq);
    Ok(())
}
