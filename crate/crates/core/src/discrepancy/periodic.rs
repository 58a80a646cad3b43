use rayon::prelude::*;

use crate::cubature::CubatureRule;
use crate::error::{invalid, Result};
use crate::kernels::{periodic_value, MAX_ORDER};

/// Octaves spanned by the logarithmic scale grid below `u = 1/2`.
const U_OCTAVES: f64 = 8.0;

/// Tensor grid for the periodic smooth discrepancy: `z_points` equispaced
/// centres `i / z_points` and `u_points` log-spaced scales
/// `u_k = 2^(-1 - 8 k / u_points)` per axis.
///
/// Both grids are nested under doubling, so with `p = inf` a refined grid
/// never reports a smaller value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodicGrid {
    pub z_points: usize,
    pub u_points: usize,
}

impl PeriodicGrid {
    pub fn new(z_points: usize, u_points: usize) -> Self {
        Self { z_points, u_points }
    }

    fn scales(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.u_points;
        let u: Vec<f64> = (0..n).map(|k| 0.5 * (-U_OCTAVES * k as f64 / n as f64).exp2()).collect();
        // Rectangle weights in the plain (linear) measure on (0, 1/2].
        let w = (0..n).map(|k| u[k] - if k + 1 < n { u[k + 1] } else { 0.0 }).collect();
        (u, w)
    }
}

fn lp_norm(values: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, (v, _)| m.max(v))
    } else {
        values.map(|(v, w)| w * v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Grid estimate of the periodic r-smooth `L_{p1,p2}` discrepancy: the
/// `L_{p1}` norm over centres `z` of
/// `|prod u_j^r - sum_mu lambda_mu h~^r(x_mu, z, u)|`, followed by the
/// `L_{p2}` norm over scales `u in (0, 1/2]^d`. Infinite exponents take the
/// maximum.
pub fn periodic_smooth_discrepancy(rule: &CubatureRule, order: usize, p1: f64, p2: f64, grid: PeriodicGrid) -> Result<f64> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(invalid(format!("smoothness order must be in 1..={MAX_ORDER}")));
    }
    if !(p1 >= 1.0 && p2 >= 1.0) {
        return Err(invalid("norm exponents must be at least 1"));
    }
    if grid.z_points < 4 || grid.u_points < 4 {
        return Err(invalid("periodic grids need at least 4 points per axis"));
    }
    let points = rule.points();
    let d = points.dim();
    let total_z = grid.z_points.checked_pow(d as u32);
    let total_u = grid.u_points.checked_pow(d as u32);
    let (Some(total_z), Some(total_u)) = (total_z, total_u) else {
        return Err(invalid("periodic grid too large"));
    };
    let (scales, widths) = grid.scales();
    let weights = rule.weights();
    let digits = |mut idx: usize, base: usize| {
        let mut out = vec![0usize; d];
        for j in (0..d).rev() {
            out[j] = idx % base;
            idx /= base;
        }
        out
    };

    let per_u: Vec<(f64, f64)> = (0..total_u)
        .into_par_iter()
        .map(|iu| {
            let k = digits(iu, grid.u_points);
            let u: Vec<f64> = k.iter().map(|&k| scales[k]).collect();
            let cell: f64 = k.iter().map(|&k| widths[k]).product();
            let integral: f64 = u.iter().map(|v| v.powi(order as i32)).product();
            let errors = (0..total_z).map(|iz| {
                let z: Vec<f64> = digits(iz, grid.z_points)
                    .iter()
                    .map(|&i| i as f64 / grid.z_points as f64)
                    .collect();
                let s: f64 = points
                    .iter()
                    .zip(weights)
                    .map(|(x, l)| l * periodic_value(x, &z, &u, order))
                    .sum();
                ((integral - s).abs(), 1.0 / total_z as f64)
            });
            (lp_norm(errors, p1), cell)
        })
        .collect();
    Ok(lp_norm(per_u.into_iter(), p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::fibonacci_set;

    #[test]
    fn zero_weights_leave_the_integral() {
        let p = fibonacci_set(6).unwrap();
        let rule = CubatureRule::new(p.clone(), vec![0.0; p.len()]).unwrap();
        let v = periodic_smooth_discrepancy(&rule, 2, f64::INFINITY, f64::INFINITY, PeriodicGrid::new(4, 4)).unwrap();
        assert!((v - 0.5f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn sup_is_monotone_under_refinement() {
        let rule = CubatureRule::equal_weight(fibonacci_set(7).unwrap()).unwrap();
        let inf = f64::INFINITY;
        let coarse = periodic_smooth_discrepancy(&rule, 2, inf, inf, PeriodicGrid::new(4, 4)).unwrap();
        let fine = periodic_smooth_discrepancy(&rule, 2, inf, inf, PeriodicGrid::new(8, 8)).unwrap();
        assert!(fine >= coarse);
        let l2 = periodic_smooth_discrepancy(&rule, 2, 2.0, 2.0, PeriodicGrid::new(8, 8)).unwrap();
        assert!(l2 <= fine);
        assert!(periodic_smooth_discrepancy(&rule, 2, 2.0, 2.0, PeriodicGrid::new(3, 8)).is_err());
    }
}
