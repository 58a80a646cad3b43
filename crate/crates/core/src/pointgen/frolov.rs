use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::PointSet;
use crate::error::{invalid, Error, Result};
use crate::util::frac;

/// Radius of the integer box on which the norm form is verified.
const NORM_CHECK_RADIUS: i64 = 50;

/// The Vandermonde matrix of the roots of
/// `P_d(x) = (x-1)(x-3)...(x-(2d-1)) - 1`, together with the derived
/// quantities needed to build Frolov lattices.
///
/// `P_d` is irreducible over the rationals with `d` real roots, so
/// `prod_j (A m)_j` is a nonzero integer for every nonzero integer `m`.
#[derive(Clone, Debug)]
pub struct FrolovBasis {
    dim: usize,
    /// Monic integer coefficients, lowest degree first.
    poly: Vec<i64>,
    roots: Vec<f64>,
    /// Row-major `A[j][i] = roots[j]^i`.
    matrix: Vec<f64>,
    det: f64,
    /// Row-major `(A^-1)^T`.
    inv_transpose: Vec<f64>,
}

impl FrolovBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn poly(&self) -> &[i64] {
        &self.poly
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inv_transpose(&self) -> &[f64] {
        &self.inv_transpose
    }

    /// `L(m) = A m`.
    pub fn lattice_point(&self, m: &[i64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).map(|i| self.matrix[j * d + i] * m[i] as f64).sum())
            .collect()
    }

    /// `prod_j L_j(m)`, an integer up to rounding.
    pub fn norm_form(&self, m: &[i64]) -> f64 {
        self.lattice_point(m).iter().product()
    }

    /// Expected number of Frolov points per unit volume at scale `a`.
    pub fn density(&self, a: f64) -> f64 {
        a.powi(self.dim as i32) * self.det.abs()
    }
}

/// Builds (and caches) the Frolov basis for `1 <= d <= 4`.
pub fn frolov_basis(d: usize) -> Result<FrolovBasis> {
    static CACHE: [OnceLock<std::result::Result<FrolovBasis, String>>; 4] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if !(1..=4).contains(&d) {
        return Err(invalid("frolov_basis supports 1 <= d <= 4"));
    }
    CACHE[d - 1]
        .get_or_init(|| {
            build_basis(d).map_err(|e| match e {
                Error::ConstructionInvalid(msg) => msg,
                other => other.to_string(),
            })
        })
        .clone()
        .map_err(Error::ConstructionInvalid)
}

fn frolov_poly(d: usize) -> Vec<i64> {
    let mut coeffs = vec![1i64];
    for j in 1..=d as i64 {
        let root = 2 * j - 1;
        let mut next = vec![0i64; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= root * c;
        }
        coeffs = next;
    }
    coeffs[0] -= 1;
    coeffs
}

fn eval_int(poly: &[i64], x: i64) -> i128 {
    poly.iter().rev().fold(0i128, |acc, &c| acc * x as i128 + c as i128)
}

fn eval_with_derivative(poly: &[i64], x: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut scale = 0.0;
    for &c in poly.iter().rev() {
        dp = dp * x + p;
        p = p * x + c as f64;
        scale = scale * x.abs() + (c as f64).abs();
    }
    (p, dp, scale)
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.abs();
    (1..=n).filter(|k| n % k == 0).collect()
}

fn build_basis(d: usize) -> Result<FrolovBasis> {
    let poly = frolov_poly(d);

    // Rational root test: a monic integer polynomial has rational roots only
    // among the divisors of its constant term. The linear case is exempt, its
    // single root is an integer and the lattice is just Z.
    if d > 1 && poly[0] == 0 {
        return Err(Error::ConstructionInvalid("P_d has the root 0".into()));
    }
    for q in if d > 1 { divisors(poly[0]) } else { Vec::new() } {
        for cand in [q, -q] {
            if eval_int(&poly, cand) == 0 {
                return Err(Error::ConstructionInvalid(format!("P_{d} has rational root {cand}")));
            }
        }
    }

    let mut companion = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        companion[(i, d - 1)] = -(poly[i] as f64);
    }
    let eig = companion.complex_eigenvalues();
    let mut roots = Vec::with_capacity(d);
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            return Err(Error::NumericFailure(format!("non-real root {z} of P_{d}")));
        }
        roots.push(polish_root(&poly, z.re)?);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    if roots.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-8) {
        return Err(Error::NumericFailure("roots are not distinct".into()));
    }

    let a = DMatrix::from_fn(d, d, |j, i| roots[j].powi(i as i32));
    let det = a.determinant();
    if det.abs() < 1e-12 {
        return Err(Error::NumericFailure("singular Vandermonde matrix".into()));
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericFailure("Vandermonde inverse failed".into()))?;
    let inv_t = inv.transpose();

    let basis = FrolovBasis {
        dim: d,
        poly,
        roots,
        matrix: row_major(&a),
        det,
        inv_transpose: row_major(&inv_t),
    };
    verify_norm_form(&basis)?;
    Ok(basis)
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)])
        .collect()
}

fn polish_root(poly: &[i64], mut x: f64) -> Result<f64> {
    for _ in 0..100 {
        let (p, dp, scale) = eval_with_derivative(poly, x);
        if p.abs() <= 1e-12 * scale.max(1.0) {
            return Ok(x);
        }
        if dp == 0.0 {
            break;
        }
        x -= p / dp;
    }
    let (p, _, scale) = eval_with_derivative(poly, x);
    if p.abs() <= 1e-12 * scale.max(1.0) {
        Ok(x)
    } else {
        Err(Error::NumericFailure(format!("Newton polish did not converge near {x}")))
    }
}

/// Checks `|prod_j L_j(m)| >= 1 - 1e-9` for every nonzero `m` with
/// `|m|_inf <= 50`.
fn verify_norm_form(basis: &FrolovBasis) -> Result<()> {
    let d = basis.dim;
    let r = NORM_CHECK_RADIUS;
    let side = (2 * r + 1) as usize;
    let a = &basis.matrix;
    let worst = (0..side)
        .into_par_iter()
        .map(|first| {
            let m0 = first as i64 - r;
            let mut m = vec![-r; d];
            m[0] = m0;
            let mut worst = f64::INFINITY;
            let inner = side.pow(d as u32 - 1);
            for idx in 0..inner {
                let mut rem = idx;
                for slot in m.iter_mut().skip(1) {
                    *slot = (rem % side) as i64 - r;
                    rem /= side;
                }
                if m.iter().all(|&v| v == 0) {
                    continue;
                }
                let mut prod = 1.0;
                for j in 0..d {
                    let l: f64 = (0..d).map(|i| a[j * d + i] * m[i] as f64).sum();
                    prod *= l;
                }
                worst = worst.min(prod.abs());
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min);
    if worst < 1.0 - 1e-9 {
        return Err(Error::ConstructionInvalid(format!(
            "norm form drops to {worst:.3e} inside the check box"
        )));
    }
    Ok(())
}

/// Integer points `m` whose image `G m` lies in the box `[lo, hi]^d`
/// (or `[lo, hi)^d` when `hi_open`), in lexicographic order of `m`.
///
/// `gen` is the row-major generator `G`, `gen_inv` its inverse.
fn enumerate_lattice(d: usize, gen: &[f64], gen_inv: &[f64], lo: f64, hi: f64, hi_open: bool) -> Vec<Vec<f64>> {
    // Range of each m_i over the box, expanded by one.
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            let (mut mn, mut mx) = (0.0, 0.0);
            for j in 0..d {
                let c = gen_inv[i * d + j];
                mn += (c * lo).min(c * hi);
                mx += (c * lo).max(c * hi);
            }
            (mn.floor() as i64 - 1, mx.ceil() as i64 + 1)
        })
        .collect();
    // rest[i][j]: interval of sum_{i' > i} G[j][i'] m_i'.
    let mut rest = vec![vec![(0.0f64, 0.0f64); d]; d];
    for i in (0..d).rev() {
        for j in 0..d {
            let (mut a, mut b) = if i + 1 < d { rest[i + 1][j] } else { (0.0, 0.0) };
            if i + 1 < d {
                let c = gen[j * d + i + 1];
                let (r0, r1) = ranges[i + 1];
                a += (c * r0 as f64).min(c * r1 as f64);
                b += (c * r0 as f64).max(c * r1 as f64);
            }
            rest[i][j] = (a, b);
        }
    }
    let mut out = Vec::new();
    let mut partial = vec![vec![0.0f64; d]; d + 1];
    recurse(0, d, gen, &ranges, &rest, lo, hi, hi_open, &mut partial, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    level: usize,
    d: usize,
    gen: &[f64],
    ranges: &[(i64, i64)],
    rest: &[Vec<(f64, f64)>],
    lo: f64,
    hi: f64,
    hi_open: bool,
    partial: &mut Vec<Vec<f64>>,
    out: &mut Vec<Vec<f64>>,
) {
    const SLACK: f64 = 1e-9;
    let (r0, r1) = ranges[level];
    for mi in r0..=r1 {
        let mut feasible = true;
        for j in 0..d {
            let v = partial[level][j] + gen[j * d + level] * mi as f64;
            partial[level + 1][j] = v;
            let (a, b) = rest[level][j];
            if v + b < lo - SLACK || v + a > hi + SLACK {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        if level + 1 == d {
            let x = &partial[d];
            let inside = x
                .iter()
                .all(|&v| v >= lo && if hi_open { v < hi } else { v <= hi });
            if inside {
                out.push(x.clone());
            }
        } else {
            recurse(level + 1, d, gen, ranges, rest, lo, hi, hi_open, partial, out);
        }
    }
}

fn scaled_generators(basis: &FrolovBasis, a: f64) -> (Vec<f64>, Vec<f64>) {
    let d = basis.dim;
    let gen: Vec<f64> = basis.inv_transpose.iter().map(|v| v / a).collect();
    // (A^-T / a)^-1 = a A^T
    let gen_inv: Vec<f64> = (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            a * basis.matrix[j * d + i]
        })
        .collect();
    (gen, gen_inv)
}

/// The Frolov set `{(A^-1)^T m / a : m in Z^d}` intersected with the closed
/// cube `[0,1]^d`.
///
/// Points on the upper faces are kept, so coordinates equal to `1.0` can
/// occur; [`frolov_periodized`] is the variant for periodic use.
pub fn frolov_points(basis: &FrolovBasis, a: f64) -> Result<PointSet> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(invalid("frolov_points requires a > 1"));
    }
    let d = basis.dim;
    let (gen, gen_inv) = scaled_generators(basis, a);
    let pts = enumerate_lattice(d, &gen, &gen_inv, 0.0, 1.0, false);
    let cap = 4.0 * basis.density(a) + 4f64.powi(d as i32);
    if pts.len() as f64 > cap {
        return Err(Error::ConstructionInvalid(format!(
            "{} Frolov points exceed the cap {cap:.1}",
            pts.len()
        )));
    }
    PointSet::new(d, pts, format!("frolov(d={d},a={a})"))
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, and
/// `e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})` in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / x - 1.0 / (1.0 - x)).exp())
    }
}

/// Infinitely differentiable weight supported in `(-1/2, 3/2)` whose integer
/// translates sum to one.
pub fn unit_partition_weight(t: f64) -> f64 {
    if t <= -0.5 || t >= 1.5 {
        0.0
    } else if t <= 0.5 {
        smooth_step(t + 0.5)
    } else {
        1.0 - smooth_step(t - 0.5)
    }
}

/// Periodized Frolov knots and their partition-of-unity weights.
#[derive(Clone, Debug)]
pub struct PeriodizedFrolov {
    pub basis: FrolovBasis,
    pub scale: f64,
    /// Lattice points in `[-1/2, 3/2)^d`.
    pub raw: Vec<Vec<f64>>,
    /// Fractional parts of `raw`.
    pub wrapped: PointSet,
    /// `w(eta) / (a^d |det A|)`.
    pub weights: Vec<f64>,
}

impl PeriodizedFrolov {
    pub fn weight_sum(&self) -> f64 {
        crate::util::pairwise_sum(&self.weights)
    }
}

pub fn frolov_periodized(basis: &FrolovBasis, a: f64) -> Result<PeriodizedFrolov> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(invalid("frolov_periodized requires a > 1"));
    }
    let d = basis.dim;
    let (gen, gen_inv) = scaled_generators(basis, a);
    let raw = enumerate_lattice(d, &gen, &gen_inv, -0.5, 1.5, true);
    let norm = basis.density(a);
    let weights: Vec<f64> = raw
        .iter()
        .map(|eta| eta.iter().map(|&t| unit_partition_weight(t)).product::<f64>() / norm)
        .collect();
    let wrapped_coords: Vec<f64> = raw.iter().flat_map(|eta| eta.iter().map(|&t| frac(t))).collect();
    let wrapped = PointSet::from_flat(d, wrapped_coords, format!("frolov_periodic(d={d},a={a})"))?;
    Ok(PeriodizedFrolov {
        basis: basis.clone(),
        scale: a,
        raw,
        wrapped,
        weights,
    })
}
