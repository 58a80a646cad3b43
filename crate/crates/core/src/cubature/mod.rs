//! Cubature rules `sum_mu lambda_mu f(x_mu)` and their worst-case errors.

mod rates;
mod wce;

pub use rates::{family_rule, rate_experiment, rate_row, RateRow, RateTable};
pub use wce::{
    diaphony, duality_probe, periodic_kernel_sum, worst_case_error_truncated, worst_case_error_w2r, DualityProbe, WceResult,
};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::pointgen::{frolov_periodized, frolov_points, FrolovBasis};
use crate::util::pairwise_sum;
use crate::PointSet;

/// Knots with real weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureRule {
    points: PointSet,
    weights: Vec<f64>,
}

impl CubatureRule {
    pub fn new(points: PointSet, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(invalid(format!("{} weights for {} knots", weights.len(), points.len())));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights must be finite"));
        }
        Ok(Self { points, weights })
    }

    /// The equal-weight rule `Q_m` with weights `1/m`.
    pub fn equal_weight(points: PointSet) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("an equal-weight rule needs at least one knot"));
        }
        let m = points.len();
        Self::new(points, vec![1.0 / m as f64; m])
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// `sum |lambda_mu|`, the quantity bounded in stability conditions.
    pub fn weight_l1(&self) -> f64 {
        let abs: Vec<f64> = self.weights.iter().map(|w| w.abs()).collect();
        pairwise_sum(&abs)
    }

    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let terms: Vec<f64> = self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }

    /// Like [`apply`](Self::apply) for fallible integrands; the first error
    /// is returned.
    pub fn try_apply(&self, f: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
        let terms = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| Ok(w * f(x)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

/// `(a^d |det A|)^-1 sum_m f((A^-1)^T m / a)` over the Frolov points in the
/// closed cube.
///
/// Knots on the upper faces are kept, so the weight sum exceeds one by a
/// boundary term (for `d = 1, a = 4` it is `5/4`).
pub fn frolov_rule(basis: &FrolovBasis, a: f64) -> Result<CubatureRule> {
    let points = frolov_points(basis, a)?;
    let w = 1.0 / basis.density(a);
    let m = points.len();
    CubatureRule::new(points, vec![w; m])
}

/// The periodized Frolov rule with partition-of-unity weights.
pub fn frolov_periodic_rule(basis: &FrolovBasis, a: f64) -> Result<CubatureRule> {
    let p = frolov_periodized(basis, a)?;
    CubatureRule::new(p.wrapped, p.weights)
}

/// `Lambda(xi, k) = sum_mu lambda_mu e^{2 pi i <k, x_mu>}`.
pub fn lambda_xi_k(rule: &CubatureRule, k: &[i64]) -> Result<Complex64> {
    if k.len() != rule.dim() {
        return Err(invalid("frequency and knot dimensions differ"));
    }
    let terms: Vec<Complex64> = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| {
            let phase: f64 = x.iter().zip(k).map(|(xi, &ki)| crate::util::frac(xi * ki as f64)).sum();
            Complex64::from_polar(*w, 2.0 * std::f64::consts::PI * phase)
        })
        .collect();
    let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
    let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)))
}
