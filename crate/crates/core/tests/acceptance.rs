//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines come out in
//! order and unbuffered. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use qmc_quality::cubature::{rate_experiment, worst_case_error_w2r, CubatureRule};
use qmc_quality::discrepancy::{
    bound_check, fixed_volume_discrepancy, l2_star_discrepancy, lq_discrepancy_mc, r_discrepancy_l2,
    star_discrepancy_exact,
};
use qmc_quality::dispersion::{dispersion, dispersion_rate_check};
use qmc_quality::greedy::{ia_run, modulus_constants, schedule, DiscretizedSpace, GreedyKernel};
use qmc_quality::kernels::{hat_box_eval, hat_box_integral, hat_eval, HatSpec};
use qmc_quality::pointgen::{
    corput_net, fibonacci_set, halton_set, random_uniform, regular_grid, unit_partition_weight, Family,
};
use qmc_quality::quad::gauss_legendre;
use qmc_quality::stats::{loglog_fit, median};
use qmc_quality::universal::{marcinkiewicz_l2_bounds, universal_linf_check, FrequencyBox, LinfOptions};
use qmc_quality::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and regression values.
const STAR_TOL: f64 = 1e-12;
const MC_SIGMAS: f64 = 3.0;
const RDISC_TOL: f64 = 1e-10;
const CONV_TOL: f64 = 1e-5;
const HAT_INT_TOL: f64 = 1e-8;
const PARTITION_TOL: f64 = 1e-12;
const FIB_DISP_SLOPE: (f64, f64) = (-1.0, 0.1);
/// max_n disp(F_n) b_n over n = 5..20, recorded from this implementation.
const FIB_DISP_CONSTANT: f64 = 1.999_817_284_852_734;
const FROLOV_DISP_SLOPE: (f64, f64) = (-2.0, 0.3);
const FIB_WCE_SLOPE: (f64, f64) = (-1.0, 0.15);
const RANDOM_WCE_SLOPE: (f64, f64) = (-0.5, 0.15);
const ZETA_TOL: f64 = 1e-4;
const SHAPE_BAND: f64 = 0.5;
const GREEDY_SLOPE_MAX: f64 = -0.4;
const UNIVERSAL_C1_MIN: f64 = 0.2;
const JOINT_BAND: f64 = 50.0;
const GRAM_TOL: f64 = 1e-10;
const SIGMA_STABILITY: f64 = 0.1;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(x: f64, (centre, tol): (f64, f64)) -> bool {
    (x - centre).abs() <= tol
}

/// Exhaustive oracle: every corner of the critical grid, open and closed
/// boxes counted directly.
fn star_oracle(p: &PointSet) -> f64 {
    let d = p.dim();
    let m = p.len() as f64;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut v = p.axis(j);
            v.push(1.0);
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut best = 0.0f64;
    for idx in 0..total {
        let mut rest = idx;
        let b: Vec<f64> = axes
            .iter()
            .map(|a| {
                let v = a[rest % a.len()];
                rest /= a.len();
                v
            })
            .collect();
        let vol: f64 = b.iter().product();
        let open = p.iter().filter(|x| x.iter().zip(&b).all(|(xi, bi)| xi < bi)).count() as f64;
        let closed = p.iter().filter(|x| x.iter().zip(&b).all(|(xi, bi)| xi <= bi)).count() as f64;
        best = best.max(vol - open / m).max(closed / m - vol);
    }
    best
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50u64 {
        let d = 1 + (i % 3) as usize;
        let m = 1 + (i % 12) as usize;
        let p = random_uniform(m, d, 1000 + i).map_err(|e| e.to_string())?;
        let exact = star_discrepancy_exact(&p).map_err(|e| e.to_string())?;
        if !exact.exact {
            return Err(format!("set {i} not exact"));
        }
        worst = worst.max((exact.value - star_oracle(&p)).abs());
        let mut mc = 0.0f64;
        for _ in 0..1_000_000 / 50 {
            let b: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let vol: f64 = b.iter().product();
            let inside = p.iter().filter(|x| x.iter().zip(&b).all(|(xi, bi)| xi < bi)).count() as f64;
            mc = mc.max((vol - inside / m as f64).abs());
        }
        if mc > exact.value + STAR_TOL {
            return Err(format!("set {i}: sampled {mc} exceeds exact {}", exact.value));
        }
    }
    // The sample budget above totals 10^6 anchors over the 50 sets; one set
    // also gets the full 10^6 on its own.
    let p = random_uniform(12, 3, 7).map_err(|e| e.to_string())?;
    let exact = star_discrepancy_exact(&p).map_err(|e| e.to_string())?.value;
    let mut mc = 0.0f64;
    for _ in 0..1_000_000 {
        let b: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        let inside = p.iter().filter(|x| x.iter().zip(&b).all(|(xi, bi)| xi < bi)).count() as f64;
        mc = mc.max((b.iter().product::<f64>() - inside / 12.0).abs());
    }
    check(
        worst <= STAR_TOL && mc <= exact + STAR_TOL,
        format!("max |exact - oracle| = {worst:.2e}; 1e6-anchor MC {mc:.6} <= exact {exact:.6}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_z = 0.0f64;
    let mut worst_r = 0.0f64;
    for i in 0..20u64 {
        let d = 1 + (i % 3) as usize;
        let p = random_uniform(5 + i as usize, d, 200 + i).map_err(|e| e.to_string())?;
        let l2 = l2_star_discrepancy(&p).map_err(|e| e.to_string())?;
        let mc = lq_discrepancy_mc(&p, 2.0, 1_000_000, i).map_err(|e| e.to_string())?;
        worst_z = worst_z.max((mc.value - l2).abs() / mc.std_error);
        let r1 = r_discrepancy_l2(&p, None, 1).map_err(|e| e.to_string())?;
        worst_r = worst_r.max((r1 - l2).abs());
    }
    check(
        worst_z <= MC_SIGMAS && worst_r <= RDISC_TOL,
        format!("max |MC - Warnock| = {worst_z:.2} SE; max |r=1 - L2*| = {worst_r:.1e}"),
    )
}

/// Piecewise Gauss-Legendre over `[a, b]` split at `breaks`.
fn piecewise(a: f64, b: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(12);
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| a < t && t < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            nodes.iter().zip(&weights).map(|(x, wt)| wt * h * f(c + h * x)).sum::<f64>()
        })
        .sum()
}

fn criterion_3() -> Outcome {
    let mut conv_err = 0.0f64;
    let u = 0.3;
    for r in 2..=5usize {
        for i in 0..=40 {
            let x = -0.5 * r as f64 * u + i as f64 * r as f64 * u / 40.0;
            // h^r(x, u) = int h^{r-1}(x - t, u) h^1(t, u) dt.
            let breaks: Vec<f64> = (0..r).map(|k| x - (k as f64 - 0.5 * (r - 1) as f64) * u).collect();
            let conv = piecewise(-0.5 * u, 0.5 * u, &breaks, |t| hat_eval(x - t, u, r - 1).unwrap());
            conv_err = conv_err.max((conv - hat_eval(x, u, r).unwrap()).abs());
        }
    }
    let mut int_err = 0.0f64;
    for r in 1..=4usize {
        let spec = HatSpec::from_box(r, &[0.1, 0.25], &[0.35, 0.9]).map_err(|e| e.to_string())?;
        let (lo, hi) = spec.support_box();
        let brk = |j: usize| -> Vec<f64> {
            (0..=r).map(|k| lo[j] + k as f64 * spec.scale()[j]).collect()
        };
        let (b0, b1) = (brk(0), brk(1));
        let q = piecewise(lo[0], hi[0], &b0, |x| {
            piecewise(lo[1], hi[1], &b1, |y| hat_box_eval(&[x, y], &spec).unwrap())
        });
        int_err = int_err.max((q - hat_box_integral(&spec)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pu_err = 0.0f64;
    for _ in 0..1000 {
        let t: f64 = rng.gen_range(-3.0..3.0);
        let s: f64 = (-5..=5).map(|k| unit_partition_weight(t + k as f64)).sum();
        pu_err = pu_err.max((s - 1.0).abs());
    }
    check(
        conv_err <= CONV_TOL && int_err <= HAT_INT_TOL && pu_err <= PARTITION_TOL,
        format!("convolution {conv_err:.1e}; box integral {int_err:.1e}; partition {pu_err:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let sizes: Vec<u64> = (5..=20).collect();
    let fib = dispersion_rate_check(Family::Fibonacci, &sizes, 0).map_err(|e| e.to_string())?;
    let constant = fib.rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    let frolov = dispersion_rate_check(Family::Frolov { dim: 2 }, &[4, 8, 16, 32], 0).map_err(|e| e.to_string())?;
    check(
        within(fib.fit.slope, FIB_DISP_SLOPE)
            && (constant - FIB_DISP_CONSTANT).abs() <= 1e-9
            && within(frolov.fit_vs_size.slope, FROLOV_DISP_SLOPE),
        format!(
            "Fibonacci slope {:.4}, max disp*b_n {constant:.6}; Frolov slope vs a {:.4}",
            fib.fit.slope, frolov.fit_vs_size.slope
        ),
    )
}

fn criterion_5() -> Outcome {
    let fib = rate_experiment(Family::Fibonacci, 1.0, &(8..=16).collect::<Vec<_>>(), &[], 1e-4)
        .map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (1..=10).collect();
    let random = rate_experiment(Family::Random { dim: 2 }, 1.0, &[32, 64, 128, 256, 512, 1024], &seeds, 1e-4)
        .map_err(|e| e.to_string())?;
    let one = PointSet::new(1, vec![vec![0.0]], "origin").map_err(|e| e.to_string())?;
    let v1 = worst_case_error_w2r(&CubatureRule::equal_weight(one).unwrap(), 1.0, 1e-4)
        .map_err(|e| e.to_string())?
        .value;
    let mut grid_err = 0.0f64;
    for m in [2usize, 5, 16] {
        let g = PointSet::new(1, (0..m).map(|j| vec![j as f64 / m as f64]).collect(), "grid").unwrap();
        let v = worst_case_error_w2r(&CubatureRule::equal_weight(g).unwrap(), 1.0, 1e-4).unwrap().value;
        let expect = (PI * PI / 3.0).sqrt() / m as f64;
        grid_err = grid_err.max((v - expect).abs() / expect);
    }
    check(
        within(fib.fit.slope, FIB_WCE_SLOPE)
            && within(random.fit.slope, RANDOM_WCE_SLOPE)
            && (v1 - PI / 3f64.sqrt()).abs() <= ZETA_TOL
            && grid_err <= 1e-12,
        format!(
            "Fibonacci slope {:.4}; random slope {:.4}; m=1 value {v1:.6}; grid rel err {grid_err:.1e}",
            fib.fit.slope, random.fit.slope
        ),
    )
}

/// `max_V D^r(F_n, V) b_n^r / log2(2V/V0)` over dyadic `V` in `[V0, 1/2]`.
fn shape_constant(p: &PointSet, c: f64, values: &[(f64, f64)]) -> f64 {
    let b = p.len() as f64;
    let v0 = c / b;
    values
        .iter()
        .filter(|&&(v, _)| v >= v0)
        .map(|&(v, d)| d * b * b / (2.0 * v / v0).log2())
        .fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let sets: Vec<PointSet> = [10usize, 13, 16].iter().map(|&n| fibonacci_set(n).unwrap()).collect();
    let cs = [0.5, 1.0, 2.0, 4.0];
    // D^2(F_n, V) for V = 2^-1, 2^-2, ... down to the smallest candidate V0.
    let tables: Vec<Vec<(f64, f64)>> = sets
        .iter()
        .map(|p| {
            let floor = cs[0] / p.len() as f64;
            let mut out = Vec::new();
            let mut v = 0.5;
            while v >= floor {
                out.push((v, fixed_volume_discrepancy(p, 2, v, 4096).unwrap().value));
                v *= 0.5;
            }
            out
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for &c in &cs {
        let k: Vec<f64> = sets.iter().zip(&tables).map(|(p, t)| shape_constant(p, c, t)).collect();
        let med = median(&k);
        let spread = k.iter().map(|x| (x / med - 1.0).abs()).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| spread < b.2) {
            best = Some((c, k, spread));
        }
    }
    let (c, k, spread) = best.unwrap();
    check(
        spread <= SHAPE_BAND,
        format!("fitted c = {c}; K_n = {k:.4?}; max deviation from median {:.1}%", 100.0 * spread),
    )
}

fn criterion_7() -> Outcome {
    let space = DiscretizedSpace::tensor_grid(1, 256, 2.0).unwrap();
    let kernel = GreedyKernel::hat(2, 0.05).unwrap();
    let dict: Vec<Vec<f64>> = (0..256)
        .map(|i| {
            let x = [(i as f64 + 0.5) / 256.0];
            space.sample(|y| kernel.eval(&x, y))
        })
        .collect();
    // An L2 bump: a Gaussian-weighted mixture of the dictionary.
    let w: Vec<f64> = (0..256)
        .map(|i| {
            let t = (i as f64 + 0.5) / 256.0 - 0.45;
            (-t * t / 0.02).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    let target: Vec<f64> = (0..space.len())
        .map(|j| dict.iter().zip(&w).map(|(g, wi)| g[j] * wi).sum::<f64>() / total)
        .collect();
    let trace = ia_run(&target, &dict, &space, 256, 1.0).map_err(|e| e.to_string())?;
    let ms = [8usize, 16, 32, 64, 128, 256];
    let res: Vec<f64> = ms.iter().map(|&m| trace.steps[m - 1].residual).collect();
    let fit = loglog_fit(&ms.map(|m| m as f64), &res).unwrap();
    let (gamma, q) = modulus_constants(2.0).unwrap();
    let schedule_ok = trace.steps.iter().all(|s| s.eps == schedule(1.0, gamma, q, s.n))
        && (trace.steps[3].eps - 0.5f64.sqrt() * 0.5).abs() < 1e-15;
    let single = ia_run(&dict[7], std::slice::from_ref(&dict[7]), &space, 4, 1.0).map_err(|e| e.to_string())?;
    let single_ok = single.steps.iter().all(|s| s.residual == 0.0);
    check(
        fit.slope <= GREEDY_SLOPE_MAX && schedule_ok && single_ok,
        format!("residual slope {:.4}; schedule exact {schedule_ok}; singleton zero {single_ok}", fit.slope),
    )
}

fn criterion_8() -> Outcome {
    let net = corput_net(8).unwrap();
    let c1 = universal_linf_check(&net, 8 - 4, &LinfOptions::new(100, 1)).map_err(|e| e.to_string())?.ratio;
    let sets = [
        corput_net(8).unwrap(),
        corput_net(6).unwrap(),
        fibonacci_set(12).unwrap(),
        regular_grid(16, 2).unwrap(),
        halton_set(256, 2).unwrap(),
        random_uniform(256, 2, 5).unwrap(),
    ];
    let mut band_max = 0.0f64;
    let mut band_ok = true;
    for p in &sets {
        let disp = dispersion(p).map_err(|e| e.to_string())?.value;
        let r = p.len().ilog2() as usize;
        for c in 2..=5 {
            let n = r - c;
            let ratio = universal_linf_check(p, n, &LinfOptions::new(30, 1)).map_err(|e| e.to_string())?.ratio;
            if ratio >= UNIVERSAL_C1_MIN {
                let scaled = disp * (1u64 << n) as f64;
                band_max = band_max.max(scaled);
                band_ok &= scaled <= JOINT_BAND;
            }
        }
    }
    let b = FrequencyBox::new(vec![2, 1]).unwrap();
    let (lo, hi) = marcinkiewicz_l2_bounds(&b.frequencies(), &regular_grid(8, 2).unwrap()).unwrap();
    let gram_ok = (lo - 1.0).abs() <= GRAM_TOL && (hi - 1.0).abs() <= GRAM_TOL;
    check(
        c1 >= UNIVERSAL_C1_MIN && band_ok && gram_ok,
        format!("corput_net(8), c=4: c1_hat = {c1:.4}; max disp*2^n in band = {band_max:.2}; grid Gram ({lo:.12}, {hi:.12})"),
    )
}

fn criterion_9() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for d in [2usize, 3] {
        let maxima: Vec<f64> = (0..5u64)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut mx = 0.0f64;
                for _ in 0..100 {
                    // Log-uniform scales in [2^-12, 1].
                    let u: Vec<f64> = (0..d).map(|_| (-12.0 * rng.gen::<f64>()).exp2()).collect();
                    for v in 0..=20 {
                        mx = mx.max(bound_check(v, &u, 2.0).unwrap().ratio);
                    }
                }
                mx
            })
            .collect();
        let med = median(&maxima);
        let dev = maxima.iter().map(|m| (m / med - 1.0).abs()).fold(0.0, f64::max);
        ok &= dev <= SIGMA_STABILITY;
        details.push(format!("d={d}: C = {med:.4}, max deviation {:.1}%", 100.0 * dev));
    }
    check(ok, details.join("; "))
}

fn qmcq(args: &[&str], dir: &std::path::Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_qmcq"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run qmcq");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(
        d.join("rate.cfg"),
        "experiment = rate\nfamily = random\nd = 2\nr = 1\nsizes = 16,32,64\nseeds = 1,2,3\n",
    )
    .unwrap();
    std::fs::write(
        d.join("univ.cfg"),
        "experiment = universality\nfamily = corput_net\nsizes = 6\nc = 2..3\ntrials = 10\nseeds = 4\n",
    )
    .unwrap();
    let runs: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec!["gen", "random", "--m", "300", "--d", "3", "--seed", "7", "-o", "R.pts"], Some("R.pts")),
        (vec!["metric", "lq", "-i", "R.pts", "--q", "3", "--samples", "200000", "--seed", "9"], None),
        (vec!["metric", "star", "-i", "R.pts", "--budget", "1000", "--seed", "9"], None),
        (vec!["metric", "smooth", "-i", "R.pts", "--r", "2"], None),
        (vec!["metric", "dispersion", "-i", "R.pts"], None),
        (vec!["universal", "linf", "-i", "R.pts", "--n", "2", "--trials", "10", "--seed", "2"], None),
        (vec!["universal", "sparse", "--v", "3", "--n", "3", "--m", "40", "--trials", "20", "--seed", "2"], None),
        (vec!["experiment", "rate.cfg", "-o", "rate.jsonl"], Some("rate.csv")),
        (vec!["experiment", "univ.cfg", "-o", "univ.jsonl"], Some("univ.csv")),
    ];
    let mut compared = 0;
    for (args, file) in &runs {
        let mut outputs = Vec::new();
        for threads in ["1", "8", "8"] {
            let mut a = args.clone();
            a.extend(["--threads", threads]);
            let mut bytes = qmcq(&a, d);
            if let Some(f) = file {
                bytes.extend(std::fs::read(d.join(f)).unwrap());
            }
            outputs.push(bytes);
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            return Err(format!("{args:?} differs across runs or thread counts"));
        }
        compared += 1;
    }
    Ok(format!("{compared} seeded commands byte-identical for threads 1, 8 and a rerun"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("star discrepancy oracle", criterion_1),
        ("closed form vs quadrature", criterion_2),
        ("kernel identities", criterion_3),
        ("dispersion rates", criterion_4),
        ("integration rates", criterion_5),
        ("fixed-volume shape", criterion_6),
        ("greedy rates", criterion_7),
        ("universality", criterion_8),
        ("sigma envelope", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
