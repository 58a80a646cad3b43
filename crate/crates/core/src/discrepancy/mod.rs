//! Discrepancy functionals.
//!
//! Classical star, L2 and Lq discrepancy live in one place; the smooth
//! variants share a box-search engine. Supremum-type smooth quantities are
//! returned as attained objective values, so a non-exact estimate is always
//! a lower bound of the true supremum.

mod classical;
mod periodic;
mod rdisc;
mod search;
mod sigma;

pub use classical::{l2_star_discrepancy, lq_discrepancy_mc, star_discrepancy, star_discrepancy_exact, McEstimate, EXACT_GRID_LIMIT};
pub use periodic::{periodic_smooth_discrepancy, PeriodicGrid};
pub use rdisc::r_discrepancy_l2;
pub use search::{
    fixed_volume_discrepancy, fixed_volume_discrepancy_with, optimized_smooth_discrepancy, smooth_box_error,
    smooth_discrepancy, smooth_discrepancy_with, OptimizedDiscrepancy, SearchOptions,
};
pub use sigma::{bound_check, sigma_envelope, sigma_r, SigmaCheck};

use crate::error::{invalid, Result};
use crate::report::Witness;
use crate::PointSet;

/// Half-open axis-parallel box `[lower, upper)` inside the unit cube.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(invalid("box corners must have the same positive length"));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(0.0 <= *a && a < b && *b <= 1.0) {
                return Err(invalid(format!("box side [{a}, {b}) is not a proper subinterval of [0,1]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    /// Half-open membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| a <= v && v < b)
    }

    /// Membership in the open interior.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| a < v && v < b)
    }

    pub fn witness(&self) -> Witness {
        Witness::Box {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

/// A discrepancy value and where it was attained.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyEstimate {
    pub value: f64,
    /// True when `value` is the exact supremum rather than an attained lower bound.
    pub exact: bool,
    pub witness: Witness,
    /// Number of objective evaluations spent.
    pub evaluations: u64,
}

pub(crate) fn resolve_weights(points: &PointSet, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let m = points.len();
    match weights {
        Some(w) if w.len() != m => Err(invalid(format!("{} weights for {m} points", w.len()))),
        Some(w) if w.iter().any(|v| !v.is_finite()) => Err(invalid("weights must be finite")),
        Some(w) => Ok(w.to_vec()),
        None if m == 0 => Err(invalid("the point set is empty")),
        None => Ok(vec![1.0 / m as f64; m]),
    }
}
