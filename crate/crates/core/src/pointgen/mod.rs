//! Point-set construction.
//!
//! A [`PointSet`] is an ordered list of points in the unit cube together
//! with a provenance tag naming the generator and its parameters. The
//! generators live in submodules and are re-exported here.

mod baselines;
mod family;
mod fibonacci;
mod frolov;
mod io;
mod nets;

pub use baselines::{halton_set, random_uniform, regular_grid};
pub use family::Family;
pub use fibonacci::{fibonacci_number, fibonacci_set};
pub use frolov::{frolov_basis, frolov_periodized, frolov_points, smooth_step, unit_partition_weight, FrolovBasis, PeriodizedFrolov};
pub use io::{read_points, read_points_file, write_points, write_points_file};
pub use nets::{corput_net, net_check};

use crate::error::{invalid, Result};

/// Ordered points in `[0,1]^dim`, stored row-major.
///
/// Generators produce points in the half-open cube `[0,1)^dim`. The one
/// exception is [`frolov_points`], which intersects a lattice with the
/// closed cube and may therefore emit coordinates equal to `1.0`; use
/// [`PointSet::is_half_open`] to tell the two apart.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    provenance: String,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, provenance: impl Into<String>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(invalid(format!("point {i} has length {} but dim is {dim}", p.len())));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, provenance)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid("coordinate count is not a multiple of dim"));
        }
        if let Some(bad) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(invalid(format!("coordinate {bad} outside the unit interval")));
        }
        Ok(Self {
            dim,
            coords,
            provenance: provenance.into(),
        })
    }

    pub fn empty(dim: usize, provenance: impl Into<String>) -> Result<Self> {
        Self::from_flat(dim, Vec::new(), provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// True when every coordinate lies in `[0,1)`.
    pub fn is_half_open(&self) -> bool {
        self.coords.iter().all(|&c| c < 1.0)
    }

    /// Coordinate values of axis `j`, in point order.
    pub fn axis(&self, j: usize) -> Vec<f64> {
        self.iter().map(|p| p[j]).collect()
    }

    /// A copy with one extra point appended.
    pub fn with_point(&self, p: &[f64]) -> Result<Self> {
        if p.len() != self.dim {
            return Err(invalid("point length does not match dim"));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(p);
        Self::from_flat(self.dim, coords, self.provenance.clone())
    }

    /// Reorders the axes: new axis `k` is old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.dim];
        if perm.len() != self.dim || perm.iter().any(|&p| p >= self.dim || std::mem::replace(&mut seen[p], true)) {
            return Err(invalid("not a permutation of the axes"));
        }
        let coords = self
            .iter()
            .flat_map(|p| perm.iter().map(move |&j| p[j]))
            .collect();
        Self::from_flat(self.dim, coords, self.provenance.clone())
    }

    /// Componentwise shift modulo one.
    pub fn shift_mod1(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(invalid("shift length does not match dim"));
        }
        let coords = self
            .iter()
            .flat_map(|p| p.iter().zip(shift).map(|(x, s)| crate::util::frac(x + s)))
            .collect();
        Self::from_flat(self.dim, coords, format!("{}+shift", self.provenance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_and_ragged() {
        assert!(PointSet::new(2, vec![vec![0.5, 1.5]], "x").is_err());
        assert!(PointSet::new(2, vec![vec![0.5]], "x").is_err());
        assert!(PointSet::new(0, vec![], "x").is_err());
    }

    #[test]
    fn permute_and_shift() {
        let p = PointSet::new(2, vec![vec![0.1, 0.7], vec![0.9, 0.2]], "t").unwrap();
        let q = p.permute_axes(&[1, 0]).unwrap();
        assert_eq!(q.point(0), &[0.7, 0.1]);
        assert!(p.permute_axes(&[0, 0]).is_err());
        let s = p.shift_mod1(&[0.5, 0.5]).unwrap();
        assert!((s.point(1)[0] - 0.4).abs() < 1e-15);
        assert!(s.is_half_open());
    }
}
