//! Trigonometric polynomials and sampling-discretization checks.
//!
//! Point sets stay in `[0,1)^d`; every check here evaluates at `2π ξ`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dispersion::dispersion;
use crate::error::{invalid, Error, Result};
use crate::report::Witness;
use crate::stats::median;
use crate::util::{compositions, frac};
use crate::PointSet;

/// Default oversampling factor of [`sup_norm_estimate`].
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Largest frequency set [`marcinkiewicz_l2_bounds`] accepts.
pub const MAX_GRAM_SIZE: usize = 2000;

/// The dyadic box `R(s) = {k : |k_j| < 2^{s_j}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyBox {
    s: Vec<usize>,
}

impl FrequencyBox {
    pub fn new(s: Vec<usize>) -> Result<Self> {
        if s.is_empty() {
            return Err(invalid("a frequency box needs d >= 1"));
        }
        if s.iter().any(|&x| x > 20) {
            return Err(invalid("dyadic exponents above 20 are not supported"));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// `prod_j (2^{s_j + 1} - 1)`.
    pub fn cardinality(&self) -> usize {
        self.s.iter().map(|&x| (1usize << (x + 1)) - 1).product()
    }

    /// The frequencies in lexicographic order.
    pub fn frequencies(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &x in &self.s {
            let b = (1i64 << x) - 1;
            out = out
                .into_iter()
                .flat_map(|k| {
                    (-b..=b).map(move |kj| {
                        let mut k = k.clone();
                        k.push(kj);
                        k
                    })
                })
                .collect();
        }
        out
    }
}

/// The collection `C(n, d)`: every `R(s)` with `|s|_1 = n`.
pub fn enumerate_collection(n: usize, d: usize) -> Result<Vec<FrequencyBox>> {
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    compositions(n, d).into_iter().map(FrequencyBox::new).collect()
}

/// `f(x) = sum_k c_k e^{i (k, x)}`, 2π-periodic in every coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    freqs: Vec<Vec<i64>>,
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(freqs: Vec<Vec<i64>>, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != coeffs.len() {
            return Err(invalid("need one coefficient per frequency"));
        }
        let d = freqs[0].len();
        if d == 0 || freqs.iter().any(|k| k.len() != d) {
            return Err(invalid("frequencies must share a positive dimension"));
        }
        Ok(Self { freqs, coeffs })
    }

    /// I.i.d. standard complex Gaussian coefficients.
    pub fn random(freqs: Vec<Vec<i64>>, rng: &mut impl Rng) -> Result<Self> {
        let coeffs = (0..freqs.len()).map(|_| gaussian(rng)).collect();
        Self::new(freqs, coeffs)
    }

    pub fn frequencies(&self) -> &[Vec<i64>] {
        &self.freqs
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.freqs[0].len()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| c * Complex64::cis(k.iter().zip(x).map(|(&kj, xj)| kj as f64 * xj).sum()))
            .sum()
    }

    /// `f(2π ξ)` with the phase reduced mod 1 first, for accuracy at large `k`.
    pub fn eval_unit(&self, xi: &[f64]) -> Complex64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(xi).map(|(&kj, xj)| frac(kj as f64 * xj)).sum();
                c * Complex64::cis(TAU * phase)
            })
            .sum()
    }

    /// `max_j |k_j|` per axis.
    pub fn degrees(&self) -> Vec<u64> {
        (0..self.dim())
            .map(|j| self.freqs.iter().map(|k| k[j].unsigned_abs()).max().unwrap_or(0))
            .collect()
    }

    /// The largest `|f|` over a point set, evaluated at `2π ξ`.
    pub fn max_on(&self, points: &PointSet) -> f64 {
        points.iter().map(|p| self.eval_unit(p).norm()).fold(0.0, f64::max)
    }
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `max |f|` on the equispaced tensor grid with `oversample (2N_j + 1)`
/// nodes per axis. A lower bound for `||f||_inf` that grows with the grid.
pub fn sup_norm_estimate(f: &TrigPoly, oversample: usize) -> Result<f64> {
    if oversample < 4 {
        return Err(invalid("oversample must be at least 4"));
    }
    let sizes: Vec<usize> = f.degrees().iter().map(|&n| oversample * (2 * n as usize + 1)).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&t| t.saturating_mul(f.freqs.len()) <= 1 << 32)
        .ok_or_else(|| Error::BudgetExceeded("sup-norm grid too large".into()))?;
    // Per axis, e^{i k x} for every frequency component and node.
    let tables: Vec<Vec<Vec<Complex64>>> = f
        .freqs
        .iter()
        .map(|k| {
            k.iter()
                .zip(&sizes)
                .map(|(&kj, &n)| (0..n).map(|i| Complex64::cis(TAU * frac(kj as f64 * i as f64 / n as f64))).collect())
                .collect()
        })
        .collect();
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut node = vec![0usize; sizes.len()];
            let mut rest = idx;
            for j in (0..sizes.len()).rev() {
                node[j] = rest % sizes[j];
                rest /= sizes[j];
            }
            let v: Complex64 = tables
                .iter()
                .zip(&f.coeffs)
                .map(|(t, c)| t.iter().zip(&node).fold(*c, |acc, (tj, &i)| acc * tj[i]))
                .sum();
            v.norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinfOptions {
    pub trials: usize,
    pub seed: u64,
    pub oversample: usize,
    /// Subtract `f(2π ξ^1)` so every trial polynomial vanishes at the
    /// first point, an adversarial model for small sets.
    pub zero_force: bool,
}

impl LinfOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            oversample: DEFAULT_OVERSAMPLE,
            zero_force: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinfCheck {
    /// The smallest `max_ν |f(2π ξ^ν)| / ||f||_inf` seen.
    pub ratio: f64,
    pub witness: Witness,
}

/// The worst sampling ratio over random members of every subspace in
/// `C(n, d)`.
///
/// Trial `t` of box `b` draws from its own ChaCha stream
/// `b * trials + t`, so results do not depend on the thread count.
pub fn universal_linf_check(points: &PointSet, n: usize, opts: &LinfOptions) -> Result<LinfCheck> {
    if points.is_empty() {
        return Err(invalid("universal_linf_check needs a nonempty point set"));
    }
    if opts.trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let boxes = enumerate_collection(n, points.dim())?;
    let jobs: Vec<(usize, usize)> = (0..boxes.len()).flat_map(|b| (0..opts.trials).map(move |t| (b, t))).collect();
    let freqs: Vec<Vec<Vec<i64>>> = boxes.iter().map(FrequencyBox::frequencies).collect();
    let ratios = jobs
        .par_iter()
        .map(|&(b, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream((b * opts.trials + t) as u64);
            let mut f = TrigPoly::random(freqs[b].clone(), &mut rng)?;
            if opts.zero_force {
                let at = f.eval_unit(points.point(0));
                let zero = f.freqs.iter().position(|k| k.iter().all(|&x| x == 0)).expect("R(s) holds 0");
                f.coeffs[zero] -= at;
            }
            let sup = sup_norm_estimate(&f, opts.oversample)?;
            Ok(if sup == 0.0 { 1.0 } else { (f.max_on(points) / sup).min(1.0) })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r < ratios[worst] {
            worst = i;
        }
    }
    let (b, t) = jobs[worst];
    Ok(LinfCheck {
        ratio: ratios[worst],
        witness: Witness::Subspace {
            s: boxes[b].s.clone(),
            trial: t,
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniversalityRow {
    pub c: usize,
    pub n: usize,
    pub ratio: f64,
    pub witness: Witness,
    /// `disp(T) 2^n`.
    pub scaled_dispersion: f64,
}

/// `ĉ_1` at `n = r - c` for each `c`, with `r = floor(log2 |T|)`, next to
/// the dispersion scaled by `2^n`. Values of `c` above `r` are skipped.
pub fn universality_vs_dispersion(points: &PointSet, c_scan: &[usize], opts: &LinfOptions) -> Result<Vec<UniversalityRow>> {
    if points.is_empty() {
        return Err(invalid("need a nonempty point set"));
    }
    let r = points.len().ilog2() as usize;
    let disp = dispersion(points)?.value;
    c_scan
        .iter()
        .filter(|&&c| c <= r)
        .map(|&c| {
            let n = r - c;
            let check = universal_linf_check(points, n, opts)?;
            Ok(UniversalityRow {
                c,
                n,
                ratio: check.ratio,
                witness: check.witness,
                scaled_dispersion: disp * (1u64 << n) as f64,
            })
        })
        .collect()
}

/// Extreme eigenvalues `(λ_min, λ_max)` of the Gram matrix
/// `M_{k,k'} = (1/m) sum_ν e^{i (k - k', 2π ξ^ν)}`: the sharp constants in
/// the two-sided `L_2` sampling inequality on `T(Q)`.
pub fn marcinkiewicz_l2_bounds(freqs: &[Vec<i64>], points: &PointSet) -> Result<(f64, f64)> {
    if freqs.len() > MAX_GRAM_SIZE {
        return Err(Error::BudgetExceeded(format!("|Q| = {} exceeds {MAX_GRAM_SIZE}", freqs.len())));
    }
    if freqs.is_empty() || points.is_empty() {
        return Err(invalid("need frequencies and points"));
    }
    if freqs.iter().any(|k| k.len() != points.dim()) {
        return Err(invalid("frequency and point dimensions differ"));
    }
    let m = points.len();
    let scale = 1.0 / (m as f64).sqrt();
    let e = DMatrix::from_fn(m, freqs.len(), |nu, j| {
        let phase: f64 = freqs[j].iter().zip(points.point(nu)).map(|(&k, x)| frac(k as f64 * x)).sum();
        Complex64::cis(TAU * phase) * scale
    });
    let gram = e.adjoint() * e;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo.max(0.0), hi))
}

/// `Π_n = [-(2^{n-1} - 1), 2^{n-1} - 1]^d`.
pub fn pi_n(n: usize, d: usize) -> Result<Vec<Vec<i64>>> {
    if n == 0 || n > 20 || d == 0 {
        return Err(invalid("pi_n needs 1 <= n <= 20 and d >= 1"));
    }
    FrequencyBox::new(vec![n - 1; d]).map(|b| b.frequencies())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseProbe {
    pub worst_c1: f64,
    pub worst_c2: f64,
    pub median_c1: f64,
    /// The `Q` attaining `worst_c1`.
    pub witness: Vec<Vec<i64>>,
}

/// Draws `m` uniform points and `trials` random `v`-subsets `Q` of `Π_n`,
/// and reports the worst Gram constants over the sampled `Q`.
pub fn sparse_collection_probe(v: usize, n: usize, d: usize, m: usize, trials: usize, seed: u64) -> Result<SparseProbe> {
    if v == 0 || v > 6 || n > 4 || d > 2 {
        return Err(invalid("the probe runs at v in 1..=6, n <= 4, d <= 2"));
    }
    if m == 0 || trials == 0 {
        return Err(invalid("need m >= 1 and trials >= 1"));
    }
    let pi = pi_n(n, d)?;
    if v > pi.len() {
        return Err(invalid(format!("v = {v} exceeds |Π_n| = {}", pi.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..m * d).map(|_| rng.gen::<f64>()).collect();
    let points = PointSet::from_flat(d, coords, format!("random(m={m},d={d},seed={seed})"))?;
    let mut c1s = Vec::with_capacity(trials);
    let mut worst_c1 = f64::INFINITY;
    let mut worst_c2 = 0.0f64;
    let mut witness = Vec::new();
    for _ in 0..trials {
        let mut idx = sample(&mut rng, pi.len(), v).into_vec();
        idx.sort_unstable();
        let q: Vec<Vec<i64>> = idx.iter().map(|&i| pi[i].clone()).collect();
        let (c1, c2) = marcinkiewicz_l2_bounds(&q, &points)?;
        if c1 < worst_c1 {
            worst_c1 = c1;
            witness = q;
        }
        worst_c2 = worst_c2.max(c2);
        c1s.push(c1);
    }
    Ok(SparseProbe {
        worst_c1,
        worst_c2,
        median_c1: median(&c1s),
        witness,
    })
}
