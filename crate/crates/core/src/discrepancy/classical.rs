use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::DiscrepancyEstimate;
use crate::error::{invalid, Result};
use crate::report::Witness;
use crate::util::pairwise_sum;
use crate::PointSet;

/// Largest critical grid handled exactly by [`star_discrepancy_exact`].
pub const EXACT_GRID_LIMIT: usize = 10_000_000;

/// Exact star discrepancy `sup_b |vol[0,b) - #{x < b}/m|`.
///
/// Falls back to a seeded sample of critical corners (`exact = false`) when
/// the critical grid has more than ten million corners.
pub fn star_discrepancy_exact(points: &PointSet) -> Result<DiscrepancyEstimate> {
    star_discrepancy(points, EXACT_GRID_LIMIT, 0)
}

/// Star discrepancy with an explicit grid budget and fallback seed.
pub fn star_discrepancy(points: &PointSet, budget: usize, seed: u64) -> Result<DiscrepancyEstimate> {
    if points.is_empty() {
        return Err(invalid("star discrepancy needs at least one point"));
    }
    let grid = CriticalGrid::new(points);
    match grid.size() {
        Some(n) if n <= budget => Ok(grid.exact()),
        _ => Ok(grid.sampled(budget, seed)),
    }
}

/// Per-axis critical values and point ranks.
///
/// A point with a coordinate equal to 1 is never inside an anchored box
/// `[0,b)` with `b <= 1`, so such points only contribute to `m`.
struct CriticalGrid {
    dim: usize,
    m: usize,
    values: Vec<Vec<f64>>,
    ranks: Vec<Vec<usize>>,
}

impl CriticalGrid {
    fn new(points: &PointSet) -> Self {
        let dim = points.dim();
        let inside: Vec<&[f64]> = points.iter().filter(|p| p.iter().all(|&c| c < 1.0)).collect();
        let mut values = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut v: Vec<f64> = inside.iter().map(|p| p[j]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.push(1.0);
            values.push(v);
        }
        let ranks = inside
            .iter()
            .map(|p| (0..dim).map(|j| values[j].partition_point(|&g| g < p[j])).collect())
            .collect();
        Self {
            dim,
            m: points.len(),
            values,
            ranks,
        }
    }

    fn size(&self) -> Option<usize> {
        self.values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()))
    }

    fn exact(&self) -> DiscrepancyEstimate {
        let d = self.dim;
        let shape: Vec<usize> = self.values.iter().map(Vec::len).collect();
        let mut stride = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            stride[j] = stride[j + 1] * shape[j + 1];
        }
        let total = stride[0] * shape[0];

        let mut counts = vec![0u32; total];
        for r in &self.ranks {
            let idx: usize = r.iter().zip(&stride).map(|(a, s)| a * s).sum();
            counts[idx] += 1;
        }
        // Inclusive prefix sums along every axis: counts[k] = #{rank <= k}.
        for j in 0..d {
            let s = stride[j];
            for idx in 0..total {
                if (idx / s) % shape[j] > 0 {
                    counts[idx] += counts[idx - s];
                }
            }
        }

        let m = self.m as f64;
        let chunk = 1 << 14;
        let best = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut best = (f64::NEG_INFINITY, 0usize);
                let mut k = vec![0usize; d];
                for idx in c * chunk..((c + 1) * chunk).min(total) {
                    let mut rest = idx;
                    for j in 0..d {
                        k[j] = rest / stride[j];
                        rest %= stride[j];
                    }
                    let vol: f64 = (0..d).map(|j| self.values[j][k[j]]).product();
                    // Weak count (limit from above): points with rank <= k.
                    let weak = counts[idx] as f64 / m;
                    // Strict count (limit from below): points with rank < k.
                    let strict = if k.iter().all(|&v| v > 0) {
                        counts[idx - stride.iter().sum::<usize>()] as f64 / m
                    } else {
                        0.0
                    };
                    let cand = (vol - strict).max(weak - vol);
                    if cand > best.0 {
                        best = (cand, idx);
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });

        let mut rest = best.1;
        let corner = (0..d)
            .map(|j| {
                let kj = rest / stride[j];
                rest %= stride[j];
                self.values[j][kj]
            })
            .collect();
        DiscrepancyEstimate {
            value: best.0,
            exact: true,
            witness: Witness::Anchor { corner },
            evaluations: total as u64,
        }
    }

    fn sampled(&self, budget: usize, seed: u64) -> DiscrepancyEstimate {
        let d = self.dim;
        let samples = (budget / self.m.max(1)).clamp(1_000, 1_000_000);
        let chunk = 1024;
        let chunks = samples.div_ceil(chunk);
        let best = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut best = (f64::NEG_INFINITY, Vec::new());
                for _ in c * chunk..((c + 1) * chunk).min(samples) {
                    let k: Vec<usize> = self.values.iter().map(|v| rng.gen_range(0..v.len())).collect();
                    let (mut weak, mut strict) = (0usize, 0usize);
                    for r in &self.ranks {
                        if r.iter().zip(&k).all(|(a, b)| a <= b) {
                            weak += 1;
                            if r.iter().zip(&k).all(|(a, b)| a < b) {
                                strict += 1;
                            }
                        }
                    }
                    let vol: f64 = (0..d).map(|j| self.values[j][k[j]]).product();
                    let m = self.m as f64;
                    let cand = (vol - strict as f64 / m).max(weak as f64 / m - vol);
                    if cand > best.0 {
                        best = (cand, k);
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::NEG_INFINITY, Vec::new()), |a, b| if b.0 > a.0 { b } else { a });
        let corner = best.1.iter().enumerate().map(|(j, &k)| self.values[j][k]).collect();
        DiscrepancyEstimate {
            value: best.0,
            exact: false,
            witness: Witness::Anchor { corner },
            evaluations: samples as u64,
        }
    }
}

/// L2 star discrepancy by Warnock's closed form.
pub fn l2_star_discrepancy(points: &PointSet) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("L2 discrepancy needs at least one point"));
    }
    let d = points.dim() as i32;
    let m = points.len() as f64;
    let single: Vec<f64> = points
        .iter()
        .map(|p| p.iter().map(|x| 0.5 * (1.0 - x * x)).product())
        .collect();
    let rows: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            let terms: Vec<f64> = points
                .iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| 1.0 - a.max(*b)).product())
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let sq = 3f64.powi(-d) - 2.0 / m * pairwise_sum(&single) + pairwise_sum(&rows) / (m * m);
    Ok(sq.max(0.0).sqrt())
}

/// Monte Carlo estimate of an Lq discrepancy with its standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `(∫ |vol[0,b) - #{x < b}/m|^q db)^(1/q)` by Monte Carlo over uniform
/// anchors `b`.
///
/// Samples are drawn in fixed chunks, each from its own seeded stream, so
/// the result does not depend on the number of threads. The standard error
/// is propagated through `t -> t^(1/q)` by the delta method.
pub fn lq_discrepancy_mc(points: &PointSet, q: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(1.0..f64::INFINITY).contains(&q) {
        return Err(invalid("q must satisfy 1 <= q < infinity"));
    }
    if samples < 1000 {
        return Err(invalid("at least 1000 samples are required"));
    }
    if points.is_empty() {
        return Err(invalid("Lq discrepancy needs at least one point"));
    }
    let d = points.dim();
    let m = points.len() as f64;
    let chunk = 4096;
    let sums: Vec<(f64, f64)> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut b = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in c * chunk..((c + 1) * chunk).min(samples) {
                b.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                let count = points.iter().filter(|p| p.iter().zip(&b).all(|(x, y)| x < y)).count();
                let g = (b.iter().product::<f64>() - count as f64 / m).abs().powf(q);
                s1 += g;
                s2 += g * g;
            }
            (s1, s2)
        })
        .collect();
    let n = samples as f64;
    let mean = sums.iter().map(|s| s.0).sum::<f64>() / n;
    let var = (sums.iter().map(|s| s.1).sum::<f64>() / n - mean * mean).max(0.0) * n / (n - 1.0);
    let value = mean.powf(1.0 / q);
    let std_error = if mean > 0.0 {
        value / (q * mean) * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        value,
        std_error,
        samples,
    })
}
