//! Smooth discrepancy of a Fibonacci set, with equal weights and with
//! weights optimized by linear programming.

use qmc_quality::discrepancy::{optimized_smooth_discrepancy, r_discrepancy_l2, smooth_discrepancy, SearchOptions};
use qmc_quality::pointgen::fibonacci_set;
use qmc_quality::Result;

fn main() -> Result<()> {
    let set = fibonacci_set(9)?;
    for order in [1, 2, 3] {
        let est = smooth_discrepancy(&set, None, order, 20_000)?;
        println!("r={order}  D_r={:.3e} (exact: {})  L2 r-disc={:.3e}", est.value, est.exact, r_discrepancy_l2(&set, None, order)?);
    }
    let opt = optimized_smooth_discrepancy(&set, 2, &SearchOptions::with_budget(5_000))?;
    println!("optimized r=2: {:.3e} after {} rounds ({} boxes)", opt.value, opt.rounds, opt.boxes.len());
    Ok(())
}
