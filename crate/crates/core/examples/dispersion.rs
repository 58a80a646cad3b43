//! Largest empty box for Fibonacci and random sets, and the fitted rate.

use qmc_quality::dispersion::{dispersion, dispersion_rate_check};
use qmc_quality::pointgen::{random_uniform, Family};
use qmc_quality::Result;

fn main() -> Result<()> {
    let table = dispersion_rate_check(Family::Fibonacci, &[8, 10, 12, 14, 16], 0)?;
    for row in &table.rows {
        println!("m={:5}  disp={:.6}  disp*m={:.4}", row.cardinality, row.value, row.scaled);
    }
    println!("slope {:.3}", table.fit.slope);

    let cloud = random_uniform(200, 3, 5)?;
    let r = dispersion(&cloud)?;
    println!("random 3-d m=200: {:.5} via {:?}, box {:?}..{:?}", r.value, r.method, r.witness.lower(), r.witness.upper());
    Ok(())
}
