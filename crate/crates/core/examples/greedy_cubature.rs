//! Equal-weight cubature chosen by the incremental greedy algorithm for a
//! periodic hat kernel.

use qmc_quality::greedy::{greedy_cubature, DiscretizedSpace, GreedyKernel};
use qmc_quality::pointgen::fibonacci_set;
use qmc_quality::Result;

fn main() -> Result<()> {
    let space = DiscretizedSpace::tensor_grid(2, 32, 2.0)?;
    let candidates = fibonacci_set(12)?;
    let kernel = GreedyKernel::hat(2, 0.25)?;
    for m in [8, 16, 32, 64] {
        let g = greedy_cubature(|x, y| kernel.eval(x, y), &candidates, &space, m, 1.0)?;
        println!("m={m:3}  discrepancy={:.4e}  beta={}", g.discrepancy, g.trace.beta);
    }
    let g = greedy_cubature(|x, y| kernel.eval(x, y), &candidates, &space, 6, 1.0)?;
    g.trace.write_jsonl(std::io::stdout().lock())
}
