//! Generate each point family and write one of them in the text format.

use qmc_quality::pointgen::{corput_net, fibonacci_set, frolov_basis, frolov_points, halton_set, net_check, write_points};
use qmc_quality::Result;

fn main() -> Result<()> {
    let fib = fibonacci_set(10)?;
    println!("fibonacci n=10: {} points", fib.len());

    let basis = frolov_basis(3)?;
    let frolov = frolov_points(&basis, 8.0)?;
    println!("frolov d=3 a=8: {} points, det {:.4}", frolov.len(), basis.det());

    let net = corput_net(6)?;
    println!("corput r=6: {} points, (0,6,2)-net: {}", net.len(), net_check(&net, 0, 6, 2)?);

    let halton = halton_set(5, 2)?;
    for p in halton.iter() {
        println!("halton {:?}", p);
    }

    write_points(&fibonacci_set(5)?, std::io::stdout().lock())
}
