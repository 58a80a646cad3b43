//! Largest empty axis-parallel box.
//!
//! The dispersion of a point set is the largest volume of a box `[a, b)`
//! inside the unit cube that contains no point. The supremum is attained in
//! the closure, so the searches below work with closed candidate bounds
//! taken from point coordinates and the cube walls and only require the
//! open interior of a box to be empty. Points on a face never block.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrepancy::AxisBox;
use crate::error::{invalid, Result};
use crate::pointgen::Family;
use crate::stats::{loglog_fit, LinearFit};
use crate::PointSet;

/// Node budget of the exact search in [`dispersion_nd`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DispersionMethod {
    #[serde(rename = "exact2d")]
    Exact2d,
    #[serde(rename = "exactND")]
    ExactNd,
    #[serde(rename = "sampled")]
    Sampled,
}

impl DispersionMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            DispersionMethod::Exact2d => "exact2d",
            DispersionMethod::ExactNd => "exactND",
            DispersionMethod::Sampled => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionResult {
    pub value: f64,
    pub witness: AxisBox,
    pub method: DispersionMethod,
}

/// A candidate empty box. Candidates are totally ordered by volume, then
/// by width along the first axis, then by smaller lower corner, so parallel
/// reductions pick the same witness whatever the evaluation order.
#[derive(Clone, Debug)]
struct Cand {
    value: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Cand {
    fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let value = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        Self { value, lo, hi }
    }

    fn none() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            lo: Vec::new(),
            hi: Vec::new(),
        }
    }

    fn beats(&self, other: &Cand) -> bool {
        if self.value != other.value {
            return self.value > other.value;
        }
        if other.lo.is_empty() {
            return !self.lo.is_empty();
        }
        let w = |c: &Cand| c.hi[0] - c.lo[0];
        if w(self) != w(other) {
            return w(self) > w(other);
        }
        for (a, b) in self.lo.iter().zip(&other.lo) {
            if a != b {
                return a < b;
            }
        }
        false
    }

    fn offer(&mut self, lo: &[f64], hi: &[f64]) {
        let c = Cand::new(lo.to_vec(), hi.to_vec());
        if c.beats(self) {
            *self = c;
        }
    }

    fn into_result(self, method: DispersionMethod) -> Result<DispersionResult> {
        Ok(DispersionResult {
            value: self.value,
            witness: AxisBox::new(self.lo, self.hi)?,
            method,
        })
    }
}

fn better(a: Cand, b: Cand) -> Cand {
    if b.beats(&a) {
        b
    } else {
        a
    }
}

/// Exact dispersion of a planar point set.
///
/// Every maximal empty rectangle has its left side on the wall `x = 0` or
/// supported by a point. Wall-supported rectangles come from one sweep over
/// the y-values seen so far; point-supported ones from a rightward sweep per
/// point that narrows the admissible y-range, pruned by the area bound
/// `(1 - x_p)(top - bottom)`.
pub fn dispersion_2d(points: &PointSet) -> Result<DispersionResult> {
    if points.dim() != 2 {
        return Err(invalid("dispersion_2d needs a two-dimensional point set"));
    }
    if points.len() > 100_000 {
        return Err(invalid("dispersion_2d supports at most 1e5 points"));
    }
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let groups = x_groups(&pts);

    let plane = Plane::unit();
    let mut wall = Cand::none();
    wall_sweep(&pts, &groups, &plane, &mut wall);
    let chunk = 256;
    let best = (0..pts.len().div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = wall.clone();
            for i in c * chunk..((c + 1) * chunk).min(pts.len()) {
                point_sweep(&pts, &groups, i, &plane, &mut best);
            }
            best
        })
        .reduce(|| wall.clone(), better);
    best.into_result(DispersionMethod::Exact2d)
}

/// The last two axes of a partial box: the sides fixed on the leading axes
/// and their volume.
struct Plane<'a> {
    lo: &'a [f64],
    hi: &'a [f64],
    vol: f64,
}

impl Plane<'_> {
    fn unit() -> Plane<'static> {
        Plane { lo: &[], hi: &[], vol: 1.0 }
    }

    fn offer(&self, best: &mut Cand, lo: [f64; 2], hi: [f64; 2]) {
        if self.vol * (hi[0] - lo[0]) * (hi[1] - lo[1]) < best.value {
            return;
        }
        let full_lo: Vec<f64> = self.lo.iter().copied().chain(lo).collect();
        let full_hi: Vec<f64> = self.hi.iter().copied().chain(hi).collect();
        best.offer(&full_lo, &full_hi);
    }
}

/// Start indices of runs of equal x in the sorted points.
fn x_groups(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut g = Vec::new();
    for i in 0..pts.len() {
        if i == 0 || pts[i].0 != pts[i - 1].0 {
            g.push(i);
        }
    }
    g.push(pts.len());
    g
}

fn key(y: f64) -> u64 {
    // Order-preserving for nonnegative floats.
    y.to_bits()
}

fn wall_sweep(pts: &[(f64, f64)], groups: &[usize], plane: &Plane, best: &mut Cand) {
    let mut ys: BTreeSet<u64> = BTreeSet::new();
    for w in groups.windows(2) {
        let (s, e) = (w[0], w[1]);
        let x = pts[s].0;
        if x > 0.0 {
            for &(_, y) in &pts[s..e] {
                if ys.contains(&key(y)) {
                    continue;
                }
                let below = ys.range(..key(y)).next_back().map_or(0.0, |&b| f64::from_bits(b));
                let above = ys.range(key(y)..).next().map_or(1.0, |&b| f64::from_bits(b));
                plane.offer(best, [0.0, below], [x, above]);
            }
        }
        for &(_, y) in &pts[s..e] {
            ys.insert(key(y));
        }
    }
    let mut prev = 0.0;
    for y in ys.iter().map(|&b| f64::from_bits(b)).chain(std::iter::once(1.0)) {
        if y > prev {
            plane.offer(best, [0.0, prev], [1.0, y]);
        }
        prev = y;
    }
}

fn point_sweep(pts: &[(f64, f64)], groups: &[usize], i: usize, plane: &Plane, best: &mut Cand) {
    let (xp, yp) = pts[i];
    if xp >= 1.0 || plane.vol * (1.0 - xp) < best.value {
        return;
    }
    let (mut bottom, mut top) = (0.0f64, 1.0f64);
    let first = groups.partition_point(|&g| g < pts.len() && pts[g].0 <= xp);
    for w in groups[first.saturating_sub(1)..].windows(2) {
        let (s, e) = (w[0], w[1]);
        let x = pts[s].0;
        if x <= xp {
            continue;
        }
        if plane.vol * (1.0 - xp) * (top - bottom) < best.value {
            return;
        }
        plane.offer(best, [xp, bottom], [x, top]);
        let mut blocked = false;
        for &(_, y) in &pts[s..e] {
            if y > yp {
                top = top.min(y);
            } else if y < yp {
                bottom = bottom.max(y);
            } else {
                blocked = true;
            }
        }
        if blocked {
            return;
        }
    }
    plane.offer(best, [xp, bottom], [1.0, top]);
}

/// Exact dispersion in any dimension with the default node budget.
pub fn dispersion_nd(points: &PointSet) -> Result<DispersionResult> {
    dispersion_nd_with(points, DEFAULT_NODE_BUDGET, 0)
}

/// Exact dispersion by recursive enumeration of box sides.
///
/// Axis by axis, a side `[a, b]` is chosen from the coordinates of the points
/// still inside the partial box (plus the walls), and only points strictly
/// inside `(a, b)` are passed on. In three or more dimensions the last two
/// axes are settled by the planar sweeps of [`dispersion_2d`]; in the plane
/// the last axis is closed by its largest gap, which keeps this an
/// independent check of the sweep. Partial boxes whose volume bound cannot beat the incumbent
/// are skipped. Work is counted in one shared counter, and every task
/// only prunes against its own incumbent, so the total is the same on any
/// thread count. When it exceeds `budget` the result falls
/// back to seeded random box growth and is labelled
/// [`DispersionMethod::Sampled`], a lower bound.
pub fn dispersion_nd_with(points: &PointSet, budget: u64, seed: u64) -> Result<DispersionResult> {
    let d = points.dim();
    let all: Vec<usize> = (0..points.len()).collect();
    if d == 1 {
        let mut best = Cand::none();
        close_last_axis(points, &all, 0, &mut vec![0.0], &mut vec![1.0], 1.0, &mut best);
        return best.into_result(DispersionMethod::ExactNd);
    }
    let starts = side_values(points, &all, 0, true);
    let nodes = AtomicU64::new(0);
    let outcome: Vec<Option<Cand>> = starts
        .par_iter()
        .map(|&a| {
            let mut ctx = NdSearch {
                points,
                best: Cand::none(),
                nodes: &nodes,
                budget,
            };
            let mut lo = vec![0.0; d];
            let mut hi = vec![1.0; d];
            ctx.sides_from(0, a, &all, &mut lo, &mut hi, 1.0).then_some(ctx.best)
        })
        .collect();
    if outcome.iter().any(Option::is_none) {
        return sampled_dispersion(points, seed);
    }
    let best = outcome.into_iter().flatten().fold(Cand::none(), better);
    best.into_result(DispersionMethod::ExactNd)
}

fn side_values(points: &PointSet, idx: &[usize], axis: usize, with_zero: bool) -> Vec<f64> {
    let mut v: Vec<f64> = idx.iter().map(|&i| points.point(i)[axis]).collect();
    if with_zero {
        v.push(0.0);
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.retain(|&x| x < 1.0);
    v
}

fn close_last_axis(points: &PointSet, idx: &[usize], axis: usize, lo: &mut [f64], hi: &mut [f64], vol: f64, best: &mut Cand) {
    let mut ys: Vec<f64> = idx.iter().map(|&i| points.point(i)[axis]).collect();
    ys.push(0.0);
    ys.push(1.0);
    ys.sort_by(f64::total_cmp);
    for w in ys.windows(2) {
        if w[1] > w[0] && vol * (w[1] - w[0]) >= best.value {
            lo[axis] = w[0];
            hi[axis] = w[1];
            best.offer(lo, hi);
        }
    }
}

struct NdSearch<'a> {
    points: &'a PointSet,
    best: Cand,
    nodes: &'a AtomicU64,
    budget: u64,
}

impl NdSearch<'_> {
    fn spend(&self, work: u64) -> bool {
        self.nodes.fetch_add(work, Ordering::Relaxed) + work <= self.budget
    }

    /// Tries every upper side `b > a` on `axis`; false when over budget.
    fn sides_from(&mut self, axis: usize, a: f64, idx: &[usize], lo: &mut [f64], hi: &mut [f64], vol: f64) -> bool {
        let d = self.points.dim();
        let mut uppers: Vec<f64> = idx
            .iter()
            .map(|&i| self.points.point(i)[axis])
            .filter(|&x| x > a)
            .collect();
        uppers.push(1.0);
        uppers.sort_by(f64::total_cmp);
        uppers.dedup();
        for &b in &uppers {
            if !self.spend(1) {
                return false;
            }
            let v = vol * (b - a);
            if v < self.best.value {
                continue;
            }
            lo[axis] = a;
            hi[axis] = b;
            let inside: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| {
                    let x = self.points.point(i)[axis];
                    a < x && x < b
                })
                .collect();
            if d == 2 {
                close_last_axis(self.points, &inside, axis + 1, lo, hi, v, &mut self.best);
            } else if axis + 3 == d {
                if !self.spend(inside.len() as u64) {
                    return false;
                }
                self.plane(&inside, axis + 1, lo, hi, v);
            } else {
                for a2 in side_values(self.points, &inside, axis + 1, true) {
                    if !self.sides_from(axis + 1, a2, &inside, lo, hi, v) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Largest empty rectangle over the axes `axis` and `axis + 1`, with the
    /// leading sides already fixed in `lo[..axis]`, `hi[..axis]`.
    fn plane(&mut self, idx: &[usize], axis: usize, lo: &[f64], hi: &[f64], vol: f64) {
        let mut pts: Vec<(f64, f64)> = idx
            .iter()
            .map(|&i| {
                let p = self.points.point(i);
                (p[axis], p[axis + 1])
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let groups = x_groups(&pts);
        let plane = Plane {
            lo: &lo[..axis],
            hi: &hi[..axis],
            vol,
        };
        wall_sweep(&pts, &groups, &plane, &mut self.best);
        for i in 0..pts.len() {
            point_sweep(&pts, &groups, i, &plane, &mut self.best);
        }
    }
}

/// Seeded random empty-box growth: from a random centre, each axis in random
/// order is widened until a point blocks it, twice over.
fn sampled_dispersion(points: &PointSet, seed: u64) -> Result<DispersionResult> {
    let d = points.dim();
    let samples = 4096;
    let chunk = 64;
    let best = (0..samples / chunk)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut best = Cand::none();
            let mut axes: Vec<usize> = (0..d).collect();
            for _ in 0..chunk {
                let centre: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                let mut lo: Vec<f64> = centre.iter().map(|c| (c - 1e-9).max(0.0)).collect();
                let mut hi: Vec<f64> = centre.iter().map(|c| (c + 1e-9).min(1.0)).collect();
                if points.iter().any(|p| p.iter().zip(lo.iter().zip(&hi)).all(|(x, (a, b))| a < x && x < b)) {
                    continue;
                }
                for _ in 0..2 {
                    axes.shuffle(&mut rng);
                    for &j in &axes {
                        let (mut a, mut b) = (0.0f64, 1.0f64);
                        for p in points.iter() {
                            let blocks = (0..d).filter(|&i| i != j).all(|i| lo[i] < p[i] && p[i] < hi[i]);
                            if blocks {
                                if p[j] <= centre[j] {
                                    a = a.max(p[j]);
                                }
                                if p[j] >= centre[j] {
                                    b = b.min(p[j]);
                                }
                            }
                        }
                        lo[j] = a.min(lo[j]);
                        hi[j] = b.max(hi[j]);
                    }
                }
                best.offer(&lo, &hi);
            }
            best
        })
        .reduce(Cand::none, better);
    best.into_result(DispersionMethod::Sampled)
}

/// [`dispersion_2d`] for planar sets, [`dispersion_nd`] otherwise.
pub fn dispersion(points: &PointSet) -> Result<DispersionResult> {
    if points.dim() == 2 {
        dispersion_2d(points)
    } else {
        dispersion_nd(points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionRow {
    pub size: u64,
    pub cardinality: usize,
    pub value: f64,
    /// `value * cardinality`.
    pub scaled: f64,
}

#[derive(Clone, Debug)]
pub struct DispersionTable {
    pub family: Family,
    pub rows: Vec<DispersionRow>,
    /// Fit of `ln disp` against `ln cardinality`.
    pub fit: LinearFit,
    /// Fit of `ln disp` against `ln size` (the Frolov scale `a`, say).
    pub fit_vs_size: LinearFit,
}

/// One size of [`dispersion_rate_check`].
pub fn dispersion_row(family: Family, size: u64, seed: u64) -> Result<DispersionRow> {
    let p = family.points(size, seed)?;
    let r = dispersion(&p)?;
    Ok(DispersionRow {
        size,
        cardinality: p.len(),
        value: r.value,
        scaled: r.value * p.len() as f64,
    })
}

/// Dispersion across sizes of one family, with log-log fits.
pub fn dispersion_rate_check(family: Family, sizes: &[u64], seed: u64) -> Result<DispersionTable> {
    if sizes.len() < 2 {
        return Err(invalid("a rate check needs at least two sizes"));
    }
    let rows = sizes.iter().map(|&size| dispersion_row(family, size, seed)).collect::<Result<Vec<_>>>()?;
    let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let n: Vec<f64> = rows.iter().map(|r| r.cardinality as f64).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
    Ok(DispersionTable {
        family,
        fit: loglog_fit(&n, &v)?,
        fit_vs_size: loglog_fit(&s, &v)?,
        rows,
    })
}
