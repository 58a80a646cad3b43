use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PointSet;
use crate::error::{invalid, Result};
use crate::util::first_primes;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    while i > 0 {
        value += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    value
}

/// Halton points with indices `1..=m` in the first `d` prime bases.
pub fn halton_set(m: usize, d: usize) -> Result<PointSet> {
    if d == 0 {
        return Err(invalid("halton_set requires d >= 1"));
    }
    let primes = first_primes(d);
    let coords = (1..=m as u64)
        .flat_map(|i| primes.iter().map(move |&p| radical_inverse(i, p)))
        .collect();
    PointSet::from_flat(d, coords, format!("halton(m={m},d={d})"))
}

/// Cell centres `(2i+1)/(2k)` of the regular `k^d` grid, last axis fastest.
pub fn regular_grid(k: usize, d: usize) -> Result<PointSet> {
    if k == 0 || d == 0 {
        return Err(invalid("regular_grid requires k >= 1 and d >= 1"));
    }
    let total = k
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("grid too large"))?;
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        coords.extend(idx.iter().map(|&i| (2 * i + 1) as f64 / (2 * k) as f64));
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < k {
                break;
            }
            idx[j] = 0;
        }
    }
    PointSet::from_flat(d, coords, format!("grid(k={k},d={d})"))
}

/// `m` uniform points from a ChaCha8 stream seeded with `seed`.
pub fn random_uniform(m: usize, d: usize, seed: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(invalid("random_uniform requires d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..m * d).map(|_| rng.gen::<f64>()).collect();
    PointSet::from_flat(d, coords, format!("random(m={m},d={d},seed={seed})"))
}
