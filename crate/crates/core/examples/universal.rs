//! Universal discretization: sup-norm ratios over hyperbolic-cross boxes,
//! L2 Gram bounds and the sparse-collection probe.

use qmc_quality::pointgen::fibonacci_set;
use qmc_quality::universal::{marcinkiewicz_l2_bounds, pi_n, sparse_collection_probe, universal_linf_check, LinfOptions};
use qmc_quality::Result;

fn main() -> Result<()> {
    let opts = LinfOptions::new(16, 3);
    for k in [8, 10, 12] {
        let set = fibonacci_set(k)?;
        let check = universal_linf_check(&set, 3, &opts)?;
        println!("fibonacci m={:4}  worst ratio {:.4}", set.len(), check.ratio);
    }
    let (lo, hi) = marcinkiewicz_l2_bounds(&pi_n(3, 2)?, &fibonacci_set(12)?)?;
    println!("Gram eigenvalues on Pi_3: [{lo:.4}, {hi:.4}]");
    let probe = sparse_collection_probe(2, 3, 2, 40, 10, 9)?;
    println!("sparse v=2: worst c1 {:.4}, worst c2 {:.4}", probe.worst_c1, probe.worst_c2);
    Ok(())
}
