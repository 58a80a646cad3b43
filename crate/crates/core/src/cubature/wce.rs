//! Worst-case errors in periodic Sobolev classes.
//!
//! For a rule `(xi, lambda)` the worst-case error over the unit ball of
//! `W^r_2` (functions `F_r * phi` with `||phi||_2 <= 1`) is
//!
//! ```text
//! ( sum_{k != 0} |Lambda(xi,k)|^2 prod_j max(|k_j|,1)^(-2r) + |Lambda(xi,0) - 1|^2 )^(1/2)
//! ```
//!
//! With `r = 1` this is the diaphony. For integer `r` the frequency sum has a
//! closed spatial form through Bernoulli polynomials, which is what the
//! default route uses; the truncated frequency sum is kept as an independent
//! route and for non-integer `r`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{lambda_xi_k, CubatureRule};
use crate::error::{invalid, Error, Result};
use crate::util::{frac, pairwise_sum};

const TAU: f64 = 2.0 * std::f64::consts::PI;
/// Largest integer order evaluated through Bernoulli polynomials.
const CLOSED_FORM_MAX_ORDER: u32 = 8;
/// Work cap `m (2K+1)^d` for the truncated frequency sum.
const TRUNCATED_WORK_CAP: f64 = 4e9;

/// A worst-case error value with its truncation bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct WceResult {
    pub value: f64,
    /// Upper bound on the omitted part of the value (zero for the closed form).
    pub tail_bound: f64,
    /// Frequency cut-off when the truncated sum was used.
    pub kmax: Option<usize>,
    /// Set when the work cap forced a cut-off whose tail exceeds the tolerance.
    pub tail_dominated: bool,
}

fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, k)
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += binom * bk;
            binom *= (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
    }
    b
}

fn bernoulli_poly(coeffs: &[f64], x: f64) -> f64 {
    // coeffs[i] multiplies x^(n - i)
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

fn bernoulli_poly_coeffs(n: usize) -> Vec<f64> {
    let b = bernoulli_numbers(n);
    let mut binom = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    for (k, bk) in b.iter().enumerate() {
        out.push(binom * bk);
        binom *= (n - k) as f64 / (k + 1) as f64;
    }
    out
}

/// `1 + 2 sum_{k>=1} k^(-2r) cos(2 pi k t)` for integer `r >= 1`, in closed
/// form `1 + (-1)^(r+1) (2 pi)^(2r) B_{2r}({t}) / (2r)!`.
pub fn periodic_kernel_sum(t: f64, order: u32) -> f64 {
    let coeffs = bernoulli_poly_coeffs(2 * order as usize);
    kernel_with(&coeffs, order, t)
}

fn kernel_with(coeffs: &[f64], order: u32, t: f64) -> f64 {
    let n = 2 * order as i32;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    1.0 + sign * TAU.powi(n) * bernoulli_poly(coeffs, frac(t)) / fact
}

fn closed_form(rule: &CubatureRule, order: u32) -> f64 {
    let coeffs = bernoulli_poly_coeffs(2 * order as usize);
    let pts = rule.points();
    let w = rule.weights();
    let rows: Vec<f64> = (0..rule.len())
        .into_par_iter()
        .map(|i| {
            let x = pts.point(i);
            let terms: Vec<f64> = pts
                .iter()
                .zip(w)
                .map(|(y, wy)| wy * x.iter().zip(y).map(|(a, b)| kernel_with(&coeffs, order, a - b)).product::<f64>())
                .collect();
            w[i] * pairwise_sum(&terms)
        })
        .collect();
    let sum = pairwise_sum(&rows);
    (sum - 2.0 * rule.weight_sum() + 1.0).max(0.0).sqrt()
}

fn check_order(order: f64) -> Result<()> {
    if !(order > 0.5) || !order.is_finite() {
        return Err(invalid("the smoothness order must exceed 1/2"));
    }
    Ok(())
}

/// The frequency sum restricted to `||k||_inf <= kmax`.
///
/// Every omitted term is nonnegative, so the value can only grow with
/// `kmax`.
pub fn worst_case_error_truncated(rule: &CubatureRule, order: f64, kmax: usize) -> Result<f64> {
    check_order(order)?;
    let d = rule.dim();
    let side = 2 * kmax + 1;
    if rule.len() as f64 * (side as f64).powi(d as i32) > TRUNCATED_WORK_CAP {
        return Err(Error::BudgetExceeded(format!("frequency box of side {side} in dimension {d}")));
    }
    let m = rule.len();
    // phases[(mu * d + j) * (kmax + 1) + k] = e^{2 pi i k x_{mu,j}}
    let mut phases = vec![Complex64::new(0.0, 0.0); m * d * (kmax + 1)];
    for (mu, x) in rule.points().iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            let base = (mu * d + j) * (kmax + 1);
            for k in 0..=kmax {
                phases[base + k] = Complex64::from_polar(1.0, TAU * frac(xj * k as f64));
            }
        }
    }
    let phase = |mu: usize, j: usize, k: i64| {
        let p = phases[(mu * d + j) * (kmax + 1) + k.unsigned_abs() as usize];
        if k < 0 {
            p.conj()
        } else {
            p
        }
    };
    let weight = |k: i64| (k.unsigned_abs().max(1) as f64).powf(-2.0 * order);
    let lambda = rule.weights();
    let rest: usize = side.pow(d as u32 - 1);
    let slices: Vec<f64> = (0..side)
        .into_par_iter()
        .map(|first| {
            let mut k = vec![0i64; d];
            let mut terms = Vec::with_capacity(rest);
            for idx in 0..rest {
                k[0] = first as i64 - kmax as i64;
                let mut r = idx;
                for j in (1..d).rev() {
                    k[j] = (r % side) as i64 - kmax as i64;
                    r /= side;
                }
                if k.iter().all(|&v| v == 0) {
                    continue;
                }
                let mut lam = Complex64::new(0.0, 0.0);
                for (mu, l) in lambda.iter().enumerate() {
                    let mut e = Complex64::new(*l, 0.0);
                    for (j, &kj) in k.iter().enumerate() {
                        e *= phase(mu, j, kj);
                    }
                    lam += e;
                }
                terms.push(lam.norm_sqr() * k.iter().map(|&v| weight(v)).product::<f64>());
            }
            pairwise_sum(&terms)
        })
        .collect();
    let zero = rule.weight_sum() - 1.0;
    Ok((pairwise_sum(&slices) + zero * zero).sqrt())
}

fn zeta(s: f64) -> f64 {
    let n = 1000;
    let head: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
    let nf = n as f64;
    head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s)
}

/// Bound on the squared tail `sum_{||k||_inf > K}` of the frequency sum.
fn tail_squared(rule: &CubatureRule, order: f64, kmax: usize) -> f64 {
    let d = rule.dim() as i32;
    let l1 = rule.weight_l1();
    let one_axis = 2.0 * (kmax as f64).powf(1.0 - 2.0 * order) / (2.0 * order - 1.0);
    l1 * l1 * d as f64 * one_axis * (1.0 + 2.0 * zeta(2.0 * order)).powi(d - 1)
}

/// Worst-case error of the rule over the unit ball of `W^r_2`, to
/// tolerance `tol`.
///
/// Integer orders up to 8 use the exact Bernoulli-polynomial form. Other
/// orders use the truncated frequency sum with the smallest cut-off whose
/// tail bound is below `tol`; if that cut-off is out of reach the largest
/// affordable one is used and `tail_dominated` is set.
pub fn worst_case_error_w2r(rule: &CubatureRule, order: f64, tol: f64) -> Result<WceResult> {
    check_order(order)?;
    if rule.is_empty() {
        return Err(invalid("the rule has no knots"));
    }
    if order.fract() == 0.0 && order <= CLOSED_FORM_MAX_ORDER as f64 {
        return Ok(WceResult {
            value: closed_form(rule, order as u32),
            tail_bound: 0.0,
            kmax: None,
            tail_dominated: false,
        });
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let d = rule.dim() as i32;
    let l1 = rule.weight_l1();
    let scale = l1 * l1 * d as f64 * 2.0 * (1.0 + 2.0 * zeta(2.0 * order)).powi(d - 1) / (2.0 * order - 1.0);
    let wanted = (scale / (tol * tol)).powf(1.0 / (2.0 * order - 1.0)).ceil().max(1.0);
    let affordable = ((TRUNCATED_WORK_CAP / rule.len() as f64).powf(1.0 / d as f64) - 1.0) / 2.0;
    let kmax = wanted.min(affordable.floor()).max(1.0) as usize;
    let tail = tail_squared(rule, order, kmax).sqrt();
    Ok(WceResult {
        value: worst_case_error_truncated(rule, order, kmax)?,
        tail_bound: tail,
        kmax: Some(kmax),
        tail_dominated: tail > tol,
    })
}

/// Diaphony: the worst-case error with `r = 1`.
pub fn diaphony(rule: &CubatureRule, tol: f64) -> Result<WceResult> {
    worst_case_error_w2r(rule, 1.0, tol)
}

/// Outcome of probing the error bound with explicit integrands.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityProbe {
    /// The frequency sum restricted to the probe's frequency box.
    pub truncated_wce: f64,
    /// Largest error over random unit-norm `phi`.
    pub best_random: f64,
    /// Error for the `phi` aligned with the error functional.
    pub aligned: f64,
}

/// Integrates `f = F_{r,alpha} * phi` for trigonometric `phi` with
/// `||phi||_2 = 1` supported on `||k||_inf <= kmax`, evaluating `f` at the
/// knots in space.
///
/// Random complex Gaussian `phi` give lower bounds for the worst-case
/// error; the aligned `phi` attains the truncated frequency sum.
pub fn duality_probe(rule: &CubatureRule, order: f64, alpha: &[f64], trials: usize, kmax: usize, seed: u64) -> Result<DualityProbe> {
    check_order(order)?;
    let d = rule.dim();
    if alpha.len() != d {
        return Err(invalid("one phase per dimension is required"));
    }
    let side = 2 * kmax + 1;
    let count = side.pow(d as u32);
    let freqs: Vec<Vec<i64>> = (0..count)
        .map(|mut idx| {
            let mut k = vec![0i64; d];
            for j in (0..d).rev() {
                k[j] = (idx % side) as i64 - kmax as i64;
                idx /= side;
            }
            k
        })
        .collect();
    let kernel_hat: Vec<Complex64> = freqs
        .iter()
        .map(|k| {
            k.iter()
                .zip(alpha)
                .map(|(&kj, &a)| {
                    if kj == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        let s = kj.signum() as f64;
                        Complex64::from_polar((kj.unsigned_abs() as f64).powf(-order), -s * a * std::f64::consts::FRAC_PI_2)
                    }
                })
                .product()
        })
        .collect();
    let defect: Vec<Complex64> = freqs
        .iter()
        .map(|k| {
            let l = lambda_xi_k(rule, k)?;
            Ok(if k.iter().all(|&v| v == 0) { l - 1.0 } else { l })
        })
        .collect::<Result<_>>()?;
    let truncated_wce = kernel_hat
        .iter()
        .zip(&defect)
        .map(|(f, l)| (f * l).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let error_of = |phi: &[Complex64]| -> f64 {
        let coeff: Vec<Complex64> = phi.iter().zip(&kernel_hat).map(|(p, f)| p * f).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in rule.points().iter().zip(rule.weights()) {
            let mut fx = Complex64::new(0.0, 0.0);
            for (k, c) in freqs.iter().zip(&coeff) {
                let ph: f64 = k.iter().zip(x).map(|(&kj, xj)| frac(kj as f64 * xj)).sum();
                fx += c * Complex64::from_polar(1.0, TAU * ph);
            }
            acc += w * fx;
        }
        let mean = coeff[count / 2];
        (acc - mean).norm()
    };
    let normalize = |v: Vec<Complex64>| {
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            v.into_iter().map(|c| c / n).collect()
        } else {
            v
        }
    };

    let best_random = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let phi: Vec<Complex64> = (0..count)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            error_of(&normalize(phi))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let aligned_phi: Vec<Complex64> = kernel_hat.iter().zip(&defect).map(|(f, l)| (f * l).conj()).collect();
    let aligned = error_of(&normalize(aligned_phi));
    Ok(DualityProbe {
        truncated_wce,
        best_random,
        aligned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PointSet;

    fn one_knot() -> CubatureRule {
        CubatureRule::new(PointSet::new(1, vec![vec![0.0]], "o").unwrap(), vec![1.0]).unwrap()
    }

    #[test]
    fn closed_form_kernel_matches_series() {
        for order in 1..=4u32 {
            for i in 0..13 {
                let t = i as f64 / 13.0 - 0.3;
                let series: f64 =
                    1.0 + 2.0 * (1..200_000).map(|k| (k as f64).powi(-2 * order as i32) * (TAU * k as f64 * t).cos()).sum::<f64>();
                let tol = if order == 1 { 1e-4 } else { 1e-10 };
                assert!((periodic_kernel_sum(t, order) - series).abs() < tol, "r={order} t={t}");
            }
        }
    }

    #[test]
    fn single_knot_value() {
        let v = diaphony(&one_knot(), 1e-4).unwrap();
        assert!((v.value - std::f64::consts::PI / 3f64.sqrt()).abs() < 1e-12);
        let t = worst_case_error_truncated(&one_knot(), 1.0, 100_000).unwrap();
        assert!((t - v.value).abs() < 1e-4);
    }

    #[test]
    fn grid_value() {
        for m in [3usize, 8, 13] {
            let p = PointSet::new(1, (0..m).map(|j| vec![j as f64 / m as f64]).collect(), "g").unwrap();
            let rule = CubatureRule::equal_weight(p).unwrap();
            let v = diaphony(&rule, 1e-4).unwrap().value;
            let expect = (2.0 * std::f64::consts::PI.powi(2) / 6.0).sqrt() / m as f64;
            assert!((v - expect).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn truncation_grows_with_kmax() {
        let p = crate::pointgen::random_uniform(9, 2, 3).unwrap();
        let rule = CubatureRule::equal_weight(p).unwrap();
        let mut last = 0.0;
        for k in [1, 2, 4, 8, 16] {
            let v = worst_case_error_truncated(&rule, 1.5, k).unwrap();
            assert!(v >= last);
            last = v;
        }
        let full = worst_case_error_w2r(&rule, 2.0, 1e-4).unwrap().value;
        let trunc = worst_case_error_truncated(&rule, 2.0, 64).unwrap();
        assert!((full - trunc).abs() < 1e-3 && trunc <= full + 1e-12);
    }

    #[test]
    fn non_integer_order_uses_truncation() {
        let rule = one_knot();
        let v = worst_case_error_w2r(&rule, 1.5, 1e-3).unwrap();
        assert!(v.kmax.is_some() && !v.tail_dominated);
        let exact = (2.0 * zeta(3.0)).sqrt();
        assert!((v.value - exact).abs() < 1e-3);
        assert!(worst_case_error_w2r(&rule, 0.5, 1e-3).is_err());
    }
}
