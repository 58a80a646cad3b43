use super::PointSet;
use crate::error::{invalid, Result};

/// Fibonacci numbers with `b_0 = b_1 = 1`.
pub fn fibonacci_number(n: usize) -> u64 {
    let (mut prev, mut cur) = (1u64, 1u64);
    for _ in 1..n {
        let next = prev + cur;
        prev = cur;
        cur = next;
    }
    cur
}

/// The `n`-th Fibonacci lattice `{(mu/b_n, {mu b_{n-1}/b_n})}`.
///
/// The index runs over `mu = 0..b_n`, which gives the same set modulo one
/// as `mu = 1..=b_n` while keeping every point inside `[0,1)^2`.
pub fn fibonacci_set(n: usize) -> Result<PointSet> {
    if n < 2 {
        return Err(invalid("fibonacci_set requires n >= 2"));
    }
    if n > 60 {
        return Err(invalid("fibonacci_set supports n <= 60"));
    }
    let b = fibonacci_number(n);
    let b_prev = fibonacci_number(n - 1);
    let bf = b as f64;
    let mut coords = Vec::with_capacity(2 * b as usize);
    for mu in 0..b {
        let second = (mu as u128 * b_prev as u128 % b as u128) as u64;
        coords.push(mu as f64 / bf);
        coords.push(second as f64 / bf);
    }
    PointSet::from_flat(2, coords, format!("fibonacci(n={n})"))
}
