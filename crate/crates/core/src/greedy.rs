//! The Incremental Algorithm IA(ε) in discretized `L_p` spaces.
//!
//! At step `n` the algorithm takes the norming functional of the current
//! residual `f_{n-1} = f - G_{n-1}`, picks the dictionary element where it is
//! largest, checks `F(φ_n - f) >= -ε_n`, and averages:
//! `G_n = (1 - 1/n) G_{n-1} + φ_n / n`. After `m` steps `G_m` is the equal
//! weight average of the selected elements, which is what turns the
//! algorithm into an equal-weight cubature constructor.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::cubature::CubatureRule;
use crate::error::{invalid, Error, Result};
use crate::util::pairwise_sum;
use crate::PointSet;

/// A weighted grid standing in for `L_p(Ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedSpace {
    nodes: PointSet,
    weights: Vec<f64>,
    p: f64,
}

impl DiscretizedSpace {
    pub fn new(nodes: PointSet, weights: Vec<f64>, p: f64) -> Result<Self> {
        check_exponent(p)?;
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(invalid("need one positive weight per node"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("quadrature weights must be positive"));
        }
        if (pairwise_sum(&weights) - 1.0).abs() > 1e-12 {
            return Err(invalid("quadrature weights must sum to 1"));
        }
        Ok(Self { nodes, weights, p })
    }

    /// Rectangle rule on the tensor grid `{i / n}^d`.
    pub fn tensor_grid(dim: usize, per_axis: usize, p: f64) -> Result<Self> {
        if dim == 0 || per_axis == 0 {
            return Err(invalid("tensor grid needs dim >= 1 and per_axis >= 1"));
        }
        let total = per_axis
            .checked_pow(dim as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| invalid("tensor grid too large"))?;
        let mut coords = Vec::with_capacity(total * dim);
        for idx in 0..total {
            let mut rest = idx;
            let mut pt = vec![0.0; dim];
            for j in (0..dim).rev() {
                pt[j] = (rest % per_axis) as f64 / per_axis as f64;
                rest /= per_axis;
            }
            coords.extend(pt);
        }
        let nodes = PointSet::from_flat(dim, coords, format!("grid({per_axis}^{dim})"))?;
        Self::new(nodes, vec![1.0 / total as f64; total], p)
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `p' = p / (p - 1)`.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Vec<f64> {
        let d = self.nodes.dim();
        self.nodes.coords().par_chunks(d).map(f).collect()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.lp_norm(f, self.p)
    }

    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        self.lp_norm(g, self.conjugate())
    }

    fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        let terms: Vec<f64> = f.iter().zip(&self.weights).map(|(v, w)| w * v.abs().powf(p)).collect();
        pairwise_sum(&terms).powf(1.0 / p)
    }

    /// `sum_i w_i g_i h_i`.
    pub fn pairing(&self, g: &[f64], h: &[f64]) -> f64 {
        let terms: Vec<f64> = g.iter().zip(h).zip(&self.weights).map(|((a, b), w)| w * a * b).collect();
        pairwise_sum(&terms)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent must lie in (1, inf), got {p}")));
    }
    Ok(())
}

/// The peak functional `g = sign(f) |f|^{p-1} / ||f||_p^{p-1}`, so that
/// `<g, f> = ||f||_p` and `||g||_{p'} = 1`.
pub fn norming_functional(f: &[f64], space: &DiscretizedSpace) -> Result<Vec<f64>> {
    if f.len() != space.len() {
        return Err(invalid("grid function has the wrong length"));
    }
    let norm = space.norm(f);
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let p = space.exponent();
    Ok(f.iter().map(|v| v.signum() * (v.abs() / norm).powf(p - 1.0)).collect())
}

/// Constants `(gamma, q)` with `rho(u) <= gamma u^q` for `L_p`.
pub fn modulus_constants(p: f64) -> Result<(f64, f64)> {
    check_exponent(p)?;
    Ok(if p <= 2.0 { (1.0 / p, p) } else { ((p - 1.0) / 2.0, 2.0) })
}

/// `ε_n = β γ^{1/q} n^{-(1 - 1/q)}`.
pub fn schedule(beta: f64, gamma: f64, q: f64, n: usize) -> f64 {
    beta * gamma.powf(1.0 / q) * (n as f64).powf(-(1.0 - 1.0 / q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyStep {
    pub n: usize,
    pub index: usize,
    pub residual: f64,
    pub eps: f64,
}

#[derive(Clone, Debug)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub beta: f64,
    pub gamma: f64,
    pub q: f64,
    /// `G_m` on the grid.
    pub approximant: Vec<f64>,
}

impl GreedyTrace {
    pub fn indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.residual).collect()
    }

    /// `max_n ||f_n|| n^{1 - 1/q}`, the empirical constant in the rate bound.
    pub fn decay_constant(&self) -> f64 {
        let e = 1.0 - 1.0 / self.q;
        self.steps.iter().map(|s| s.residual * (s.n as f64).powf(e)).fold(0.0, f64::max)
    }

    /// One JSON object per step.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `m` steps of IA(ε) with the argmax choice at every step.
///
/// Ties go to the lowest index. A vanishing residual has the zero
/// functional, every element ties and index 0 is taken; the feasibility
/// check then reads `0 >= -ε_n` and passes.
pub fn ia_run(target: &[f64], dictionary: &[Vec<f64>], space: &DiscretizedSpace, m: usize, beta: f64) -> Result<GreedyTrace> {
    if dictionary.is_empty() {
        return Err(invalid("dictionary is empty"));
    }
    if target.len() != space.len() || dictionary.iter().any(|g| g.len() != space.len()) {
        return Err(invalid("grid functions must match the space"));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    let (gamma, q) = modulus_constants(space.exponent())?;
    let mut g_n = vec![0.0; space.len()];
    let mut residual = target.to_vec();
    let mut steps = Vec::with_capacity(m);
    for n in 1..=m {
        let functional = match norming_functional(&residual, space) {
            Ok(g) => g,
            Err(Error::ZeroFunction) => vec![0.0; space.len()],
            Err(e) => return Err(e),
        };
        let scores: Vec<f64> = dictionary.par_iter().map(|phi| space.pairing(&functional, phi)).collect();
        let mut index = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[index] {
                index = i;
            }
        }
        let eps = schedule(beta, gamma, q, n);
        let slack = scores[index] - space.pairing(&functional, target);
        if slack < -eps {
            return Err(Error::ScheduleFailure {
                step: n,
                deficit: -eps - slack,
            });
        }
        let t = 1.0 / n as f64;
        for ((g, phi), (r, f)) in g_n.iter_mut().zip(&dictionary[index]).zip(residual.iter_mut().zip(target)) {
            // Same as (1 - t) G + t φ, but exact when φ = G.
            *g += t * (phi - *g);
            *r = f - *g;
        }
        steps.push(GreedyStep {
            n,
            index,
            residual: space.norm(&residual),
            eps,
        });
    }
    Ok(GreedyTrace {
        steps,
        beta,
        gamma,
        q,
        approximant: g_n,
    })
}

/// Translation-invariant periodic kernels `K(x, y) = k({x - y})` for
/// [`greedy_cubature`].
#[derive(Clone, Debug, PartialEq)]
pub enum GreedyKernel {
    /// Product of periodic hats of the given order and scale.
    Hat { order: usize, scale: f64 },
    /// Indicator of `E^d` with `E` a union of intervals in `[0, 1)`.
    Indicator { intervals: Vec<(f64, f64)> },
}

impl GreedyKernel {
    pub fn hat(order: usize, scale: f64) -> Result<Self> {
        if !(1..=crate::kernels::MAX_ORDER).contains(&order) || !(scale > 0.0 && scale <= 0.5) {
            return Err(invalid("hat kernel needs 1 <= order <= 30 and scale in (0, 1/2]"));
        }
        Ok(GreedyKernel::Hat { order, scale })
    }

    pub fn indicator(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !(0.0 <= a && a < b && b <= 1.0)) {
            return Err(invalid("intervals must satisfy 0 <= a < b <= 1"));
        }
        Ok(GreedyKernel::Indicator { intervals })
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            GreedyKernel::Hat { order, scale } => {
                let scales = vec![*scale; x.len()];
                crate::kernels::periodic_value(y, x, &scales, *order)
            }
            GreedyKernel::Indicator { intervals } => {
                let inside = x.iter().zip(y).all(|(a, b)| {
                    let t = crate::util::frac(a - b);
                    intervals.iter().any(|&(lo, hi)| lo <= t && t < hi)
                });
                f64::from(u8::from(inside))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GreedyCubature {
    /// Selected knots, repeated by multiplicity, each with weight `1/m`.
    pub rule: CubatureRule,
    pub trace: GreedyTrace,
    /// `||J_K - (1/m) sum K(ξ^μ, .)||` in the space norm, for the
    /// unnormalized kernel.
    pub discrepancy: f64,
    /// The factor the kernel sections were divided by to have norm <= 1.
    pub normalization: f64,
}

/// Equal-weight cubature for the kernel `K` by IA(ε) over the dictionary
/// `{K(x, .) : x in candidates}`.
///
/// The target `J_K(y) = int K(x, y) dx` is replaced by the average of the
/// dictionary over the candidates, which lies in its convex hull. On a
/// schedule failure β is doubled, up to 8.
pub fn greedy_cubature(
    kernel: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    candidates: &PointSet,
    space: &DiscretizedSpace,
    m: usize,
    beta: f64,
) -> Result<GreedyCubature> {
    if candidates.is_empty() || m == 0 {
        return Err(invalid("need candidates and m >= 1"));
    }
    let d = space.nodes().dim();
    let mut dictionary: Vec<Vec<f64>> = candidates
        .iter()
        .map(|x| space.nodes().coords().par_chunks(d).map(|y| kernel(x, y)).collect())
        .collect();
    let normalization = dictionary.iter().map(|g| space.norm(g)).fold(1.0, f64::max);
    if normalization > 1.0 {
        dictionary.iter_mut().flatten().for_each(|v| *v /= normalization);
    }
    let inv = 1.0 / dictionary.len() as f64;
    let target: Vec<f64> = (0..space.len())
        .map(|i| pairwise_sum(&dictionary.iter().map(|g| g[i]).collect::<Vec<_>>()) * inv)
        .collect();

    let mut b = beta;
    let trace = loop {
        match ia_run(&target, &dictionary, space, m, b) {
            Err(Error::ScheduleFailure { .. }) if b * 2.0 <= 8.0 => b *= 2.0,
            other => break other?,
        }
    };
    let knots: Vec<Vec<f64>> = trace.steps.iter().map(|s| candidates.point(s.index).to_vec()).collect();
    let rule = CubatureRule::equal_weight(PointSet::new(candidates.dim(), knots, "greedy")?)?;
    let residual: Vec<f64> = target.iter().zip(&trace.approximant).map(|(f, g)| f - g).collect();
    Ok(GreedyCubature {
        rule,
        discrepancy: space.norm(&residual) * normalization,
        normalization,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::periodic_value;
    use crate::stats::loglog_fit;

    fn hat_dictionary(space: &DiscretizedSpace, k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|i| {
                let c = [(i as f64 + 0.5) / k as f64];
                space.sample(|y| periodic_value(y, &c, &[0.25], 2))
            })
            .collect()
    }

    /// A bump-weighted convex combination of the dictionary.
    fn bump_target(dict: &[Vec<f64>]) -> Vec<f64> {
        let k = dict.len();
        let w: Vec<f64> = (0..k)
            .map(|i| {
                let c = (i as f64 + 0.5) / k as f64 - 0.4;
                (-c * c / 0.02).exp()
            })
            .collect();
        let total: f64 = w.iter().sum();
        (0..dict[0].len())
            .map(|j| dict.iter().zip(&w).map(|(g, wi)| g[j] * wi).sum::<f64>() / total)
            .collect()
    }

    #[test]
    fn functional_identities() {
        let space = DiscretizedSpace::tensor_grid(1, 64, 2.0).unwrap();
        let f = space.sample(|x| (6.0 * x[0]).sin() + 0.3);
        let g = norming_functional(&f, &space).unwrap();
        let n = space.norm(&f);
        assert!(g.iter().zip(&f).all(|(a, b)| (a - b / n).abs() < 1e-14));
        for p in [1.5, 2.0, 3.0] {
            let space = DiscretizedSpace::tensor_grid(2, 8, p).unwrap();
            let f = space.sample(|x| x[0] - 0.7 * x[1] * x[1]);
            let g = norming_functional(&f, &space).unwrap();
            assert!((space.pairing(&g, &f) - space.norm(&f)).abs() < 1e-10);
            assert!((space.dual_norm(&g) - 1.0).abs() < 1e-10);
        }
        let zero = vec![0.0; space.len()];
        assert!(matches!(norming_functional(&zero, &space), Err(Error::ZeroFunction)));
    }

    #[test]
    fn constants_and_schedule() {
        assert_eq!(modulus_constants(2.0).unwrap(), (0.5, 2.0));
        let (g, q) = modulus_constants(1.5).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-15 && q == 1.5);
        assert_eq!(modulus_constants(3.0).unwrap(), (1.0, 2.0));
        assert!(modulus_constants(1.0).is_err());
        assert!((schedule(1.0, 0.5, 2.0, 4) - 0.5f64.sqrt() * 0.5).abs() < 1e-15);
        assert!((schedule(1.0, 0.5, 2.0, 4) - 0.35355).abs() < 1e-5);
    }

    #[test]
    fn singleton_dictionary() {
        let space = DiscretizedSpace::tensor_grid(1, 32, 2.0).unwrap();
        let g = space.sample(|x| 0.5 * x[0]);
        let t = ia_run(&g, std::slice::from_ref(&g), &space, 5, 1.0).unwrap();
        assert!(t.residuals().iter().all(|&r| r == 0.0));
        assert_eq!(t.indices(), vec![0; 5]);
    }

    #[test]
    fn approximant_is_the_average_of_the_selection() {
        let space = DiscretizedSpace::tensor_grid(1, 128, 2.0).unwrap();
        let dict = hat_dictionary(&space, 32);
        let target = bump_target(&dict);
        let t = ia_run(&target, &dict, &space, 20, 1.0).unwrap();
        for i in 0..space.len() {
            let avg: f64 = t.steps.iter().map(|s| dict[s.index][i]).sum::<f64>() / 20.0;
            assert!((avg - t.approximant[i]).abs() < 1e-12);
        }
        // Powers of two scale exactly, so the argmax sequence must match.
        let scaled_target: Vec<f64> = target.iter().map(|v| 4.0 * v).collect();
        let scaled_dict: Vec<Vec<f64>> = dict.iter().map(|g| g.iter().map(|v| 4.0 * v).collect()).collect();
        let s = ia_run(&scaled_target, &scaled_dict, &space, 20, 4.0).unwrap();
        assert_eq!(s.indices(), t.indices());
    }

    #[test]
    fn out_of_hull_target_fails_the_schedule() {
        let space = DiscretizedSpace::tensor_grid(1, 32, 2.0).unwrap();
        let dict = hat_dictionary(&space, 4);
        let target: Vec<f64> = dict[0].iter().map(|v| 10.0 * v).collect();
        match ia_run(&target, &dict, &space, 3, 1.0) {
            Err(Error::ScheduleFailure { step, deficit }) => {
                assert_eq!(step, 1);
                assert!(deficit > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn residual_decay_rate() {
        let space = DiscretizedSpace::tensor_grid(1, 256, 2.0).unwrap();
        let dict = hat_dictionary(&space, 256);
        let target = bump_target(&dict);
        let t = ia_run(&target, &dict, &space, 256, 1.0).unwrap();
        let ns: Vec<f64> = [8, 16, 32, 64, 128, 256].iter().map(|&n| n as f64).collect();
        let rs: Vec<f64> = ns.iter().map(|&n| t.steps[n as usize - 1].residual).collect();
        let fit = loglog_fit(&ns, &rs).unwrap();
        assert!(fit.slope <= -0.4, "{} {:?}", fit.slope, rs);
    }

    #[test]
    fn one_knot_rule_matches_direct_evaluation() {
        let space = DiscretizedSpace::tensor_grid(1, 64, 2.0).unwrap();
        let cands = PointSet::new(1, (0..16).map(|i| vec![i as f64 / 16.0]).collect(), "c").unwrap();
        let k = |x: &[f64], y: &[f64]| 32.0 * periodic_value(y, x, &[0.25], 2);
        let out = greedy_cubature(k, &cands, &space, 1, 1.0).unwrap();
        assert_eq!(out.rule.len(), 1);
        let xi = out.rule.points().point(0).to_vec();
        let target: Vec<f64> = space
            .sample(|y| cands.iter().map(|x| k(x, y)).sum::<f64>() / 16.0);
        let diff: Vec<f64> = target.iter().zip(space.sample(|y| k(&xi, y))).map(|(a, b)| a - b).collect();
        assert!((space.norm(&diff) - out.discrepancy).abs() < 1e-12);
        assert!(out.normalization > 1.0);
    }

    #[test]
    fn kernel_rates() {
        let space = DiscretizedSpace::tensor_grid(1, 256, 2.0).unwrap();
        let cands = crate::pointgen::halton_set(256, 1).unwrap();
        for kernel in [
            GreedyKernel::hat(2, 0.1).unwrap(),
            GreedyKernel::indicator(vec![(0.0, 0.1), (0.3, 0.45)]).unwrap(),
        ] {
            let ms = [8usize, 16, 32, 64, 128];
            let d: Vec<f64> = ms
                .iter()
                .map(|&m| greedy_cubature(|x, y| kernel.eval(x, y), &cands, &space, m, 1.0).unwrap().discrepancy)
                .collect();
            let fit = loglog_fit(&ms.map(|m| m as f64), &d).unwrap();
            assert!(fit.slope <= -0.4, "{kernel:?}: {} {d:?}", fit.slope);
        }
    }

    #[test]
    fn trace_lines() {
        let space = DiscretizedSpace::tensor_grid(1, 16, 2.0).unwrap();
        let dict = hat_dictionary(&space, 4);
        let t = ia_run(&dict[1], &dict, &space, 3, 1.0).unwrap();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["index"], 1);
    }
}
