//! Quasi-Monte Carlo point sets and the quality metrics used to judge them.
//!
//! The crate is organised around a handful of modules:
//!
//! * [`pointgen`]: Fibonacci lattices, Frolov lattice sets (plain and
//!   periodized), the two-dimensional van der Corput net, and Halton, grid
//!   and random baselines.
//! * [`kernels`]: smooth hat functions built from cardinal B-splines, their
//!   periodizations, truncated-power kernels and Bernoulli-type kernels.
//! * [`discrepancy`]: star, L2 and Lq discrepancy; r-smooth, optimized,
//!   fixed-volume and periodic smooth discrepancy; the L2 r-discrepancy.
//! * [`dispersion`]: largest empty axis-parallel box.
//! * [`cubature`]: cubature rules, Frolov rules, exponential sums and the
//!   worst-case error in periodic Sobolev classes (diaphony).
//! * [`greedy`]: the incremental greedy algorithm in discretized L_p spaces
//!   and the equal-weight cubature it produces.
//! * [`universal`]: trigonometric polynomials and universal sampling
//!   discretization checks.
//! * [`harness`]: experiment configs, JSON-lines reports and the command
//!   implementations behind the `qmcq` binary.
//!
//! Every randomized routine takes an explicit seed, and parallel reductions
//! are ordered, so results are bit-identical across thread counts.

pub mod cubature;
pub mod discrepancy;
pub mod dispersion;
mod error;
pub mod greedy;
pub mod harness;
pub mod kernels;
pub mod pointgen;
pub mod quad;
pub mod report;
pub mod stats;
pub mod universal;
mod util;

pub use error::{Error, Result};
pub use pointgen::PointSet;
