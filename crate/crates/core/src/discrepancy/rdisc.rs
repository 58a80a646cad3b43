use rayon::prelude::*;

use super::resolve_weights;
use crate::error::{invalid, Result};
use crate::quad::gauss_legendre;
use crate::util::pairwise_sum;
use crate::PointSet;

/// L2 r-discrepancy
/// `|| prod_j y_j^r / r! - sum_mu lambda_mu B_r(x_mu, y) ||_2` where
/// `B_r(x, y) = prod_j (y_j - x_j)_+^(r-1) / (r-1)!`.
///
/// Squaring and integrating in `y` splits into one-dimensional polynomial
/// integrals over `[max(a, b), 1]`, each integrated exactly by an `r`-node
/// Gauss-Legendre rule. With `r = 1` and equal weights this is Warnock's
/// formula for the L2 star discrepancy.
pub fn r_discrepancy_l2(points: &PointSet, weights: Option<&[f64]>, order: usize) -> Result<f64> {
    if order == 0 || order > 20 {
        return Err(invalid("r-discrepancy order must be in 1..=20"));
    }
    let lambda = resolve_weights(points, weights)?;
    let r = order as i32;
    let fact: f64 = (1..order).map(|k| k as f64).product();
    let (nodes, gl_weights) = gauss_legendre(order);
    let integrate = |a: f64, f: &dyn Fn(f64) -> f64| {
        let half = 0.5 * (1.0 - a);
        nodes.iter().zip(&gl_weights).map(|(t, w)| w * f(a + half * (t + 1.0))).sum::<f64>() * half
    };
    let kernel = |y: f64, x: f64| (y - x).powi(r - 1) / fact;
    let target = |y: f64| y.powi(r) / (fact * order as f64);

    let i3 = 1.0 / ((2 * order + 1) as f64 * (fact * order as f64).powi(2));
    let d = points.dim() as i32;
    let cross: Vec<f64> = points
        .iter()
        .zip(&lambda)
        .map(|(p, l)| l * p.iter().map(|&a| integrate(a, &|y| target(y) * kernel(y, a))).product::<f64>())
        .collect();
    let rows: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            let terms: Vec<f64> = points
                .iter()
                .zip(&lambda)
                .map(|(q, l)| {
                    l * p
                        .iter()
                        .zip(q)
                        .map(|(&a, &b)| integrate(a.max(b), &|y| kernel(y, a) * kernel(y, b)))
                        .product::<f64>()
                })
                .collect();
            lambda[i] * pairwise_sum(&terms)
        })
        .collect();
    let sq = i3.powi(d) - 2.0 * pairwise_sum(&cross) + pairwise_sum(&rows);
    Ok(sq.max(0.0).sqrt())
}
