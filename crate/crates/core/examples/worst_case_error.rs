//! Worst-case error in the periodic Sobolev class for several families.

use qmc_quality::cubature::{family_rule, rate_experiment, worst_case_error_w2r};
use qmc_quality::pointgen::Family;
use qmc_quality::Result;

fn main() -> Result<()> {
    let rule = family_rule(Family::Fibonacci, 12, 0)?;
    let w = worst_case_error_w2r(&rule, 2.0, 1e-12)?;
    println!("fibonacci m={} r=2: {:.4e} (tail {:.1e})", rule.len(), w.value, w.tail_bound);

    for family in [Family::Fibonacci, Family::Random { dim: 2 }] {
        let sizes: Vec<u64> = if family.is_random() { vec![64, 128, 256, 512] } else { vec![8, 10, 12, 14] };
        let table = rate_experiment(family, 1.0, &sizes, &[1, 2, 3, 4], 1e-10)?;
        println!("{} r=1 slope {:.3}", family.name(), table.fit.slope);
    }
    Ok(())
}
