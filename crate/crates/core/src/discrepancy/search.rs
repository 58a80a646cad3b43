//! Multistart box search shared by the smooth discrepancies.
//!
//! A box is described by a small real state vector through a [`Chart`]. The
//! search evaluates a grid of starting states, keeps the best few and
//! polishes each by coordinate ascent, where every coordinate step is a
//! coarse scan followed by golden-section refinement.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use super::{resolve_weights, AxisBox, DiscrepancyEstimate};
use crate::error::{invalid, Error, Result};
use crate::kernels::{hat_value, MAX_ORDER};
use crate::report::Witness;
use crate::PointSet;

const MIN_WIDTH: f64 = 1e-9;
const MAX_ROUNDS: usize = 60;
const SCAN: usize = 12;
const GOLDEN_STEPS: usize = 40;
const LP_ROUNDS: usize = 20;
const LP_TOL: f64 = 1e-8;

/// Budget and multistart controls for the box searches.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Number of starting boxes evaluated before refinement.
    pub budget: usize,
    /// How many of the best starts are refined.
    pub refine: usize,
    /// Boxes that are always refined in addition to the grid starts.
    pub extra_starts: Vec<AxisBox>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: 4096,
            refine: 8,
            extra_starts: Vec::new(),
        }
    }
}

impl SearchOptions {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }
}

/// `|integral - sum_mu lambda_mu h_B(x_mu)|` for hats of one order, with the
/// points sorted along the first axis so a box only visits its own slab.
pub(crate) struct HatObjective {
    dim: usize,
    order: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    index: Vec<usize>,
    first: Vec<f64>,
}

impl HatObjective {
    pub(crate) fn new(points: &PointSet, weights: &[f64], order: usize) -> Self {
        let d = points.dim();
        let mut index: Vec<usize> = (0..points.len()).collect();
        index.sort_by(|&a, &b| points.point(a)[0].total_cmp(&points.point(b)[0]).then(a.cmp(&b)));
        let coords = index.iter().flat_map(|&i| points.point(i).iter().copied()).collect();
        let weights = index.iter().map(|&i| weights[i]).collect();
        let first = index.iter().map(|&i| points.point(i)[0]).collect();
        Self {
            dim: d,
            order,
            coords,
            weights,
            index,
            first,
        }
    }

    fn set_weights(&mut self, weights: &[f64]) {
        self.weights = self.index.iter().map(|&i| weights[i]).collect();
    }

    pub(crate) fn integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let r = self.order as f64;
        lo.iter().zip(hi).map(|(a, b)| ((b - a) / r).powi(self.order as i32)).product()
    }

    /// Calls `f(sorted position, hat value)` for every point in the support.
    fn for_each_hat(&self, lo: &[f64], hi: &[f64], mut f: impl FnMut(usize, f64)) {
        let d = self.dim;
        let start = self.first.partition_point(|&x| x < lo[0]);
        let end = self.first.partition_point(|&x| x < hi[0]);
        if self.order == 1 {
            // Direct half-open membership avoids centre/scale round-off.
            for mu in start..end {
                let p = &self.coords[mu * d..(mu + 1) * d];
                if (1..d).all(|j| lo[j] <= p[j] && p[j] < hi[j]) {
                    f(mu, 1.0);
                }
            }
            return;
        }
        let r = self.order as f64;
        let mut center = [0.0; 8];
        let mut scale = [0.0; 8];
        let (center, scale) = if d <= 8 {
            (&mut center[..d], &mut scale[..d])
        } else {
            unreachable!("box searches support at most 8 dimensions")
        };
        for j in 0..d {
            center[j] = 0.5 * (lo[j] + hi[j]);
            scale[j] = (hi[j] - lo[j]) / r;
        }
        for mu in start..end {
            let p = &self.coords[mu * d..(mu + 1) * d];
            let mut v = 1.0;
            for j in 0..d {
                v *= hat_value(p[j] - center[j], scale[j], self.order);
                if v == 0.0 {
                    break;
                }
            }
            if v != 0.0 {
                f(mu, v);
            }
        }
    }

    pub(crate) fn signed(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each_hat(lo, hi, |mu, v| s += self.weights[mu] * v);
        self.integral(lo, hi) - s
    }

    pub(crate) fn error(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.signed(lo, hi).abs()
    }

    /// Hat values keyed by original point index.
    fn row(&self, lo: &[f64], hi: &[f64]) -> Vec<(usize, f64)> {
        let mut row = Vec::new();
        self.for_each_hat(lo, hi, |mu, v| row.push((self.index[mu], v)));
        row.sort_by_key(|e| e.0);
        row
    }
}

/// Maps a state vector to a box and describes its coordinate moves.
trait Chart: Sync {
    fn moves(&self) -> usize;
    fn range(&self, s: &[f64], k: usize) -> (f64, f64);
    fn apply(&self, s: &mut [f64], k: usize, t: f64);
    fn current(&self, s: &[f64], k: usize) -> f64;
    fn bounds(&self, s: &[f64], lo: &mut [f64], hi: &mut [f64]);
}

/// State `[lo_0..lo_d, hi_0..hi_d]`; moves are the lower faces, the upper
/// faces, and rigid shifts along each axis.
struct FreeChart {
    dim: usize,
}

impl Chart for FreeChart {
    fn moves(&self) -> usize {
        3 * self.dim
    }

    fn range(&self, s: &[f64], k: usize) -> (f64, f64) {
        let d = self.dim;
        match k / d {
            0 => (0.0, s[d + k] - MIN_WIDTH),
            1 => (s[k - d] + MIN_WIDTH, 1.0),
            _ => {
                let j = k - 2 * d;
                (0.0, 1.0 - (s[d + j] - s[j]))
            }
        }
    }

    fn apply(&self, s: &mut [f64], k: usize, t: f64) {
        let d = self.dim;
        if k < 2 * d {
            s[k] = t;
        } else {
            let j = k - 2 * d;
            let w = s[d + j] - s[j];
            s[j] = t;
            s[d + j] = (t + w).min(1.0);
        }
    }

    fn current(&self, s: &[f64], k: usize) -> f64 {
        let d = self.dim;
        if k < 2 * d {
            s[k]
        } else {
            s[k - 2 * d]
        }
    }

    fn bounds(&self, s: &[f64], lo: &mut [f64], hi: &mut [f64]) {
        lo.copy_from_slice(&s[..self.dim]);
        hi.copy_from_slice(&s[self.dim..]);
    }
}

/// State `[c_0..c_d, l_0..l_{d-1}]`: centres and the logs of all but the
/// last width; the last width is fixed by the volume constraint.
struct VolumeChart {
    dim: usize,
    log_volume: f64,
}

impl VolumeChart {
    fn widths(&self, s: &[f64], w: &mut [f64]) {
        let d = self.dim;
        let mut prod = 1.0;
        for j in 0..d - 1 {
            w[j] = s[d + j].exp();
            prod *= w[j];
        }
        w[d - 1] = self.log_volume.exp() / prod;
    }
}

impl Chart for VolumeChart {
    fn moves(&self) -> usize {
        2 * self.dim - 1
    }

    fn range(&self, s: &[f64], k: usize) -> (f64, f64) {
        let d = self.dim;
        if k < d {
            let mut w = vec![0.0; d];
            self.widths(s, &mut w);
            (0.5 * w[k], 1.0 - 0.5 * w[k])
        } else {
            let others: f64 = (0..d - 1).filter(|&i| i != k - d).map(|i| s[d + i]).sum();
            (self.log_volume - others, 0.0)
        }
    }

    fn apply(&self, s: &mut [f64], k: usize, t: f64) {
        s[k] = t;
    }

    fn current(&self, s: &[f64], k: usize) -> f64 {
        s[k]
    }

    fn bounds(&self, s: &[f64], lo: &mut [f64], hi: &mut [f64]) {
        let d = self.dim;
        let mut w = vec![0.0; d];
        self.widths(s, &mut w);
        for j in 0..d {
            let wj = w[j].min(1.0);
            let c = s[j].clamp(0.5 * wj, 1.0 - 0.5 * wj);
            lo[j] = (c - 0.5 * wj).max(0.0);
            hi[j] = (lo[j] + wj).min(1.0);
        }
    }
}

struct Found {
    value: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    evaluations: u64,
}

fn evaluate(obj: &HatObjective, chart: &dyn Chart, s: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let mut lo = vec![0.0; obj.dim];
    let mut hi = vec![0.0; obj.dim];
    chart.bounds(s, &mut lo, &mut hi);
    (obj.error(&lo, &hi), lo, hi)
}

/// Maximizes `f` on `[a, b]`: a uniform scan, then golden section around
/// the best scan point. Never returns less than `(t0, v0)`.
fn line_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, t0: f64, v0: f64) -> (f64, f64, u64) {
    let mut best = (t0, v0);
    if !(b > a) {
        return (best.0, best.1, 0);
    }
    let mut evals = 0;
    let h = (b - a) / SCAN as f64;
    for i in 0..=SCAN {
        let t = if i == SCAN { b } else { a + h * i as f64 };
        let v = f(t);
        evals += 1;
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - h).max(a), (best.0 + h).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    for _ in 0..GOLDEN_STEPS {
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    (best.0, best.1, evals)
}

fn refine(obj: &HatObjective, chart: &dyn Chart, start: &[f64]) -> Found {
    let mut s = start.to_vec();
    let (mut best, _, _) = evaluate(obj, chart, &s);
    let mut evaluations = 1;
    for _ in 0..MAX_ROUNDS {
        let before = best;
        for k in 0..chart.moves() {
            let (a, b) = chart.range(&s, k);
            let mut trial = s.clone();
            let (t, v, n) = line_max(
                |t| {
                    chart.apply(&mut trial, k, t);
                    evaluate(obj, chart, &trial).0
                },
                a,
                b,
                chart.current(&s, k),
                best,
            );
            evaluations += n;
            if v > best {
                chart.apply(&mut s, k, t);
                best = v;
            }
        }
        if best - before <= 1e-10 * best {
            break;
        }
    }
    let (value, lo, hi) = evaluate(obj, chart, &s);
    Found {
        value,
        lo,
        hi,
        evaluations: evaluations + 1,
    }
}

/// Evaluates all starts, refines the best `refine` of them plus `always`,
/// and returns the refined results in a deterministic order.
fn multistart(obj: &HatObjective, chart: &dyn Chart, starts: &[Vec<f64>], refine_count: usize, always: &[Vec<f64>]) -> (Vec<Found>, Vec<(f64, usize)>) {
    let values: Vec<f64> = starts.par_iter().map(|s| evaluate(obj, chart, s).0).collect();
    let mut ranked: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let chosen: Vec<&Vec<f64>> = ranked
        .iter()
        .take(refine_count)
        .map(|&(_, i)| &starts[i])
        .chain(always.iter())
        .collect();
    let mut found: Vec<Found> = chosen.par_iter().map(|s| refine(obj, chart, s)).collect();
    found[0].evaluations += starts.len() as u64;
    (found, ranked)
}

fn best_of(found: Vec<Found>) -> Found {
    let total: u64 = found.iter().map(|f| f.evaluations).sum();
    let mut best = found.into_iter().reduce(|a, b| if b.value > a.value { b } else { a }).unwrap();
    best.evaluations = total;
    best
}

/// All intervals `[a 2^-L, b 2^-L)` at the finest level `L` whose tensor
/// product stays within `budget`.
fn dyadic_starts(dim: usize, budget: usize) -> Vec<Vec<f64>> {
    let per_axis = |level: u32| {
        let n = 1usize << level;
        n * (n + 1) / 2
    };
    let mut level = 1;
    while level < 12 && per_axis(level + 1).checked_pow(dim as u32).is_some_and(|t| t <= budget) {
        level += 1;
    }
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let intervals: Vec<(f64, f64)> = (0..n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a as f64 * h, b as f64 * h)))
        .collect();
    let total = intervals.len().pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut s = vec![0.0; 2 * dim];
            for j in (0..dim).rev() {
                let (a, b) = intervals[idx % intervals.len()];
                idx /= intervals.len();
                s[j] = a;
                s[dim + j] = b;
            }
            s
        })
        .collect()
}

fn check_order(order: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(invalid(format!("smoothness order must be in 1..={MAX_ORDER}")));
    }
    Ok(())
}

fn check_points(points: &PointSet) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("smooth discrepancy needs at least one point"));
    }
    if points.dim() > 8 {
        return Err(invalid("box searches support at most 8 dimensions"));
    }
    Ok(())
}

fn hat_witness(order: usize, lo: &[f64], hi: &[f64]) -> Witness {
    Witness::Hat {
        center: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
        scale: lo.iter().zip(hi).map(|(a, b)| (b - a) / order as f64).collect(),
    }
}

/// `|prod u_j^r - sum_mu lambda_mu h^r_B(x_mu)|` for one box `B`.
pub fn smooth_box_error(points: &PointSet, weights: Option<&[f64]>, order: usize, b: &AxisBox) -> Result<f64> {
    check_order(order)?;
    check_points(points)?;
    if b.dim() != points.dim() {
        return Err(invalid("box and point set dimensions differ"));
    }
    let w = resolve_weights(points, weights)?;
    Ok(HatObjective::new(points, &w, order).error(b.lower(), b.upper()))
}

/// The r-smooth discrepancy `sup_B |prod u_j^r - sum_mu lambda_mu h^r_B(x_mu)|`
/// with default search options. Weights default to `1/m`.
pub fn smooth_discrepancy(points: &PointSet, weights: Option<&[f64]>, order: usize, budget: usize) -> Result<DiscrepancyEstimate> {
    smooth_discrepancy_with(points, weights, order, &SearchOptions::with_budget(budget))
}

pub fn smooth_discrepancy_with(points: &PointSet, weights: Option<&[f64]>, order: usize, options: &SearchOptions) -> Result<DiscrepancyEstimate> {
    check_order(order)?;
    check_points(points)?;
    let w = resolve_weights(points, weights)?;
    let obj = HatObjective::new(points, &w, order);
    let best = free_search(&obj, options)?;
    Ok(DiscrepancyEstimate {
        value: best.value,
        exact: false,
        witness: hat_witness(order, &best.lo, &best.hi),
        evaluations: best.evaluations,
    })
}

fn free_search(obj: &HatObjective, options: &SearchOptions) -> Result<Found> {
    let d = obj.dim;
    let starts = dyadic_starts(d, options.budget.max(1));
    let always = extra_states(d, &options.extra_starts)?;
    let (found, _) = multistart(obj, &FreeChart { dim: d }, &starts, options.refine.max(1), &always);
    Ok(best_of(found))
}

fn extra_states(d: usize, boxes: &[AxisBox]) -> Result<Vec<Vec<f64>>> {
    boxes
        .iter()
        .map(|b| {
            if b.dim() != d {
                return Err(invalid("extra start box has the wrong dimension"));
            }
            Ok(b.lower().iter().chain(b.upper()).copied().collect())
        })
        .collect()
}

/// Fixed-volume smooth discrepancy: the same supremum restricted to boxes of
/// volume exactly `volume`.
pub fn fixed_volume_discrepancy(points: &PointSet, order: usize, volume: f64, budget: usize) -> Result<DiscrepancyEstimate> {
    fixed_volume_discrepancy_with(points, None, order, volume, &SearchOptions::with_budget(budget))
}

pub fn fixed_volume_discrepancy_with(points: &PointSet, weights: Option<&[f64]>, order: usize, volume: f64, options: &SearchOptions) -> Result<DiscrepancyEstimate> {
    check_order(order)?;
    check_points(points)?;
    if !(volume > 0.0 && volume <= 1.0) {
        return Err(invalid("volume must lie in (0, 1]"));
    }
    let d = points.dim();
    let w = resolve_weights(points, weights)?;
    let obj = HatObjective::new(points, &w, order);
    let chart = VolumeChart {
        dim: d,
        log_volume: volume.ln(),
    };
    let starts = volume_starts(d, volume, options.budget.max(1));
    let (found, _) = multistart(&obj, &chart, &starts, options.refine.max(1), &[]);
    let best = best_of(found);
    Ok(DiscrepancyEstimate {
        value: best.value,
        exact: false,
        witness: AxisBox::new(best.lo, best.hi)?.witness(),
        evaluations: best.evaluations,
    })
}

/// Width shares on a simplex grid times a grid of feasible centres.
fn volume_starts(d: usize, volume: f64, budget: usize) -> Vec<Vec<f64>> {
    let lv = volume.ln();
    let shares_per_axis = if d == 1 { 1 } else { 9 };
    let mut shares: Vec<Vec<f64>> = Vec::new();
    for combo in crate::util::compositions(shares_per_axis - 1, d) {
        shares.push(combo.iter().map(|&c| c as f64 / (shares_per_axis - 1).max(1) as f64).collect());
    }
    if d == 1 {
        shares = vec![vec![1.0]];
    }
    let per_share = (budget / shares.len()).max(1);
    let centres = ((per_share as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let mut starts = Vec::new();
    for share in &shares {
        let widths: Vec<f64> = share.iter().map(|s| (s * lv).exp()).collect();
        let total = centres.pow(d as u32);
        for mut idx in 0..total {
            let mut s = vec![0.0; 2 * d - 1];
            for j in (0..d).rev() {
                let i = idx % centres;
                idx /= centres;
                let (a, b) = (0.5 * widths[j], 1.0 - 0.5 * widths[j]);
                s[j] = a + (b - a) * i as f64 / (centres - 1) as f64;
            }
            for j in 0..d - 1 {
                s[d + j] = share[j] * lv;
            }
            starts.push(s);
        }
    }
    starts
}

/// Result of the cutting-plane approximation of the optimized smooth
/// discrepancy.
#[derive(Clone, Debug)]
pub struct OptimizedDiscrepancy {
    /// Optimal value of the minimax problem over the final box set.
    pub value: f64,
    pub weights: Vec<f64>,
    pub boxes: Vec<AxisBox>,
    /// Largest error found by the last search with the final weights.
    pub search_value: f64,
    pub rounds: usize,
    pub evaluations: u64,
}

/// `inf_lambda sup_B |prod u_j^r - sum lambda_mu h^r_B(x_mu)|` by cutting
/// planes: solve the linear program over a finite box set, search for the
/// most violated box under the new weights, add it, repeat.
pub fn optimized_smooth_discrepancy(points: &PointSet, order: usize, options: &SearchOptions) -> Result<OptimizedDiscrepancy> {
    check_order(order)?;
    check_points(points)?;
    let m = points.len();
    if m > 1000 {
        return Err(invalid("optimized smooth discrepancy supports at most 1000 points"));
    }
    let d = points.dim();
    let uniform = vec![1.0 / m as f64; m];
    let mut obj = HatObjective::new(points, &uniform, order);
    let chart = FreeChart { dim: d };
    let starts = dyadic_starts(d, options.budget.max(1));
    let always = extra_states(d, &options.extra_starts)?;
    let (found, ranked) = multistart(&obj, &chart, &starts, options.refine.max(1), &always);
    let mut evaluations: u64 = found.iter().map(|f| f.evaluations).sum();

    let mut states: Vec<Vec<f64>> = ranked.iter().take(64).map(|&(_, i)| starts[i].clone()).collect();
    states.extend(found.iter().map(|f| f.lo.iter().chain(&f.hi).copied().collect()));

    let mut added: Vec<Vec<f64>> = Vec::new();
    let mut rounds = 0;
    let (mut t, mut lambda) = solve_lp(&obj, &states, m)?;
    let mut search_value;
    loop {
        rounds += 1;
        obj.set_weights(&lambda);
        let mut always = always.clone();
        always.extend(added.iter().cloned());
        let (found, _) = multistart(&obj, &chart, &starts, options.refine.max(1), &always);
        let best = best_of(found);
        evaluations += best.evaluations;
        search_value = best.value;
        if best.value <= t + LP_TOL || rounds >= LP_ROUNDS {
            break;
        }
        let s: Vec<f64> = best.lo.iter().chain(&best.hi).copied().collect();
        added.push(s.clone());
        states.push(s);
        (t, lambda) = solve_lp(&obj, &states, m)?;
    }
    let boxes = states
        .iter()
        .map(|s| AxisBox::new(s[..d].to_vec(), s[d..].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimizedDiscrepancy {
        value: t,
        weights: lambda,
        boxes,
        search_value,
        rounds,
        evaluations,
    })
}

fn solve_lp(obj: &HatObjective, states: &[Vec<f64>], m: usize) -> Result<(f64, Vec<f64>)> {
    let d = obj.dim;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambda: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for s in states {
        let (lo, hi) = (&s[..d], &s[d..]);
        let integral = obj.integral(lo, hi);
        let row = obj.row(lo, hi);
        let mut upper: Vec<_> = row.iter().map(|&(i, v)| (lambda[i], v)).collect();
        let mut lower = upper.clone();
        upper.push((t, -1.0));
        lower.push((t, 1.0));
        lp.add_constraint(upper.as_slice(), ComparisonOp::Le, integral);
        lp.add_constraint(lower.as_slice(), ComparisonOp::Ge, integral);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::NumericFailure(format!("cutting-plane linear program: {e}")))?;
    Ok((solution[t], lambda.iter().map(|&v| solution[v]).collect()))
}
