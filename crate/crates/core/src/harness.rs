//! Command-line front end and experiment orchestration.
//!
//! The `qmcq` binary only parses arguments into [`Cli`], sizes the thread
//! pool and maps errors to exit codes; everything else lives here so it can
//! be driven from tests.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::cubature::{diaphony, rate_row, worst_case_error_w2r, CubatureRule};
use crate::discrepancy::{
    fixed_volume_discrepancy_with, l2_star_discrepancy, lq_discrepancy_mc, optimized_smooth_discrepancy,
    periodic_smooth_discrepancy, r_discrepancy_l2, smooth_discrepancy_with, star_discrepancy, PeriodicGrid,
    SearchOptions, EXACT_GRID_LIMIT,
};
use crate::dispersion::{dispersion, dispersion_row};
use crate::error::{Error, Result};
use crate::greedy::{greedy_cubature, DiscretizedSpace, GreedyKernel};
use crate::pointgen::{
    corput_net, fibonacci_set, frolov_basis, frolov_periodized, frolov_points, halton_set, random_uniform,
    read_points_file, regular_grid, write_points, Family,
};
use crate::report::{ReportRow, ReportWriter, Witness};
use crate::stats::loglog_fit;
use crate::universal::{
    marcinkiewicz_l2_bounds, sparse_collection_probe, universal_linf_check, universality_vs_dispersion, FrequencyBox,
    LinfOptions, DEFAULT_OVERSAMPLE,
};
use crate::PointSet;

const DEFAULT_TOL: f64 = 1e-4;

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "qmcq", version, about = "Quality metrics for quasi-Monte Carlo point sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output path: the point file, report, trace or experiment report.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every randomized step. Required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Evaluation budget of searches and exact enumerations.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Truncation tolerance of frequency sums.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a point set.
    Gen(GenArgs),
    /// Evaluate one quality metric of a point-set file.
    Metric(MetricArgs),
    /// Run an experiment described by a key-value config file.
    Experiment(ExperimentArgs),
    /// Build an equal-weight cubature rule greedily.
    Greedy(GreedyArgs),
    /// Sampling-discretization checks.
    #[command(subcommand)]
    Universal(UniversalCommand),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// fibonacci, frolov, frolov_periodic, corput, grid, halton or random.
    pub generator: String,
    /// Fibonacci index.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Frolov scale.
    #[arg(long)]
    pub a: Option<f64>,
    /// Point count of Halton and random sets.
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    pub k: Option<usize>,
    /// Net exponent: the net has 2^r points.
    #[arg(long)]
    pub r: Option<u32>,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    /// star, l2star, lq, smooth, smooth-opt, fixedvol, periodic, rdisc2,
    /// dispersion, wce or diaphony.
    pub metric: String,
    /// Point-set file.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Smoothness order.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Exponent of the L_q discrepancy.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Monte Carlo samples of the L_q discrepancy.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Box volume of the fixed-volume discrepancy.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Inner (centre) exponent of the periodic discrepancy; `inf` for max.
    #[arg(long, default_value_t = 2.0)]
    pub p1: f64,
    /// Outer (scale) exponent of the periodic discrepancy.
    #[arg(long, default_value_t = 2.0)]
    pub p2: f64,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    pub config: PathBuf,
    /// CSV summary path (default: the report path with a .csv extension).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GreedyArgs {
    /// hat or indicator.
    #[arg(long, default_value = "hat")]
    pub kernel: String,
    /// Hat order.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Hat scale.
    #[arg(long, default_value_t = 0.1)]
    pub width: f64,
    /// Intervals of the indicator kernel, as `a:b,c:d`.
    #[arg(long, default_value = "0:0.1,0.3:0.45")]
    pub intervals: String,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Number of knots.
    #[arg(long)]
    pub m: usize,
    /// Exponent of the discretized space.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Number of Halton candidate knots.
    #[arg(long, default_value_t = 1024)]
    pub candidates: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Subcommand, Debug)]
pub enum UniversalCommand {
    /// Worst sampling ratio over the collection at level n.
    Linf {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
        oversample: usize,
        /// Force every trial polynomial to vanish at the first point.
        #[arg(long)]
        zero_force: bool,
    },
    /// Sampling ratio at n = floor(log2 m) - c, next to the scaled dispersion.
    Scan {
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated values or a range `a..b`.
        #[arg(long)]
        c: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Gram-matrix constants of T(R(s)) on the point set.
    Gram {
        #[arg(short, long)]
        input: PathBuf,
        /// Dyadic exponents, comma-separated.
        #[arg(long)]
        s: String,
    },
    /// Gram constants over random v-sparse frequency sets.
    Sparse {
        #[arg(long)]
        v: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

/// Runs a parsed command, writing human-readable results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args, out),
        Command::Metric(args) => cmd_metric(cli, args, out),
        Command::Experiment(args) => cmd_experiment(cli, args, out),
        Command::Greedy(args) => cmd_greedy(cli, args, out),
        Command::Universal(sub) => cmd_universal(cli, sub, out),
    }
}

fn need<T>(value: Option<T>, flag: &str, what: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("{what} needs --{flag}")))
}

fn seed(cli: &Cli, what: &str) -> Result<u64> {
    need(cli.seed, "seed", what)
}

/// Builds the requested point set.
pub fn generate(cli: &Cli, args: &GenArgs) -> Result<PointSet> {
    let g = args.generator.as_str();
    match g {
        "fibonacci" => fibonacci_set(need(args.n, "n", g)?),
        "frolov" => frolov_points(&frolov_basis(need(args.d, "d", g)?)?, need(args.a, "a", g)?),
        "frolov_periodic" => Ok(frolov_periodized(&frolov_basis(need(args.d, "d", g)?)?, need(args.a, "a", g)?)?.wrapped),
        "corput" | "corput_net" => corput_net(need(args.r, "r", g)?),
        "grid" => regular_grid(need(args.k, "k", g)?, need(args.d, "d", g)?),
        "halton" => halton_set(need(args.m, "m", g)?, need(args.d, "d", g)?),
        "random" => random_uniform(need(args.m, "m", g)?, need(args.d, "d", g)?, seed(cli, "random")?),
        other => Err(usage(format!("unknown generator {other}"))),
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let set = generate(cli, args)?;
    match &cli.output {
        Some(path) => {
            crate::pointgen::write_points_file(&set, path)?;
            writeln!(out, "count={} provenance={}", set.len(), set.provenance())?;
        }
        None => write_points(&set, out)?,
    }
    Ok(())
}

fn search_options(cli: &Cli) -> SearchOptions {
    match cli.budget {
        Some(b) => SearchOptions::with_budget(b as usize),
        None => SearchOptions::default(),
    }
}

fn integer_order(r: f64) -> Result<usize> {
    if r >= 1.0 && r.fract() == 0.0 {
        Ok(r as usize)
    } else {
        Err(usage(format!("--r must be a positive integer here, got {r}")))
    }
}

/// Evaluates one metric; the row is what `metric` appends to the report.
pub fn evaluate_metric(cli: &Cli, args: &MetricArgs, points: &PointSet) -> Result<(ReportRow, Vec<String>)> {
    let name = args.metric.as_str();
    let m = points.len();
    let mut lines = Vec::new();
    let row = match name {
        "star" => {
            let budget = cli.budget.map_or(EXACT_GRID_LIMIT, |b| b as usize);
            let est = star_discrepancy(points, budget, cli.seed.unwrap_or(0))?;
            if !est.exact && cli.seed.is_none() {
                return Err(usage("the critical grid exceeds the budget; the sampled fallback needs --seed"));
            }
            let mut row = ReportRow::new(name, est.value).exact(est.exact).witness(est.witness).budget(budget as u64);
            if !est.exact {
                row = row.seed(cli.seed.unwrap_or(0));
            }
            row
        }
        "l2star" => ReportRow::new(name, l2_star_discrepancy(points)?).exact(true),
        "lq" => {
            let s = seed(cli, "lq")?;
            let est = lq_discrepancy_mc(points, args.q, args.samples, s)?;
            lines.push(format!("std_error {}", est.std_error));
            ReportRow::new(name, est.value)
                .param("q", args.q)
                .param("samples", args.samples)
                .param("std_error", est.std_error)
                .seed(s)
        }
        "smooth" => {
            let r = integer_order(args.r)?;
            let opts = search_options(cli);
            let est = smooth_discrepancy_with(points, None, r, &opts)?;
            ReportRow::new(name, est.value)
                .param("r", r)
                .witness(est.witness)
                .budget(opts.budget as u64)
        }
        "smooth-opt" => {
            let r = integer_order(args.r)?;
            let opts = search_options(cli);
            let est = optimized_smooth_discrepancy(points, r, &opts)?;
            lines.push(format!("search_value {}", est.search_value));
            ReportRow::new(name, est.value)
                .param("r", r)
                .param("rounds", est.rounds)
                .param("search_value", est.search_value)
                .budget(opts.budget as u64)
        }
        "fixedvol" => {
            let r = integer_order(args.r)?;
            let v = need(args.volume, "volume", name)?;
            let opts = search_options(cli);
            let est = fixed_volume_discrepancy_with(points, None, r, v, &opts)?;
            ReportRow::new(name, est.value)
                .param("r", r)
                .param("volume", v)
                .witness(est.witness)
                .budget(opts.budget as u64)
        }
        "periodic" => {
            let r = integer_order(args.r)?;
            let rule = CubatureRule::equal_weight(points.clone())?;
            let grid = PeriodicGrid::new(64, 16);
            let v = periodic_smooth_discrepancy(&rule, r, args.p1, args.p2, grid)?;
            let exponent = |p: f64| if p.is_infinite() { json!("inf") } else { json!(p) };
            ReportRow::new(name, v)
                .param("r", r)
                .param("p1", exponent(args.p1))
                .param("p2", exponent(args.p2))
        }
        "rdisc2" => {
            let r = integer_order(args.r)?;
            ReportRow::new(name, r_discrepancy_l2(points, None, r)?).param("r", r).exact(true)
        }
        "dispersion" => {
            let d = dispersion(points)?;
            lines.push(format!("scaled {}", d.value * m as f64));
            ReportRow::new(name, d.value)
                .param("method", d.method.tag())
                .param("scaled", d.value * m as f64)
                .exact(d.method != crate::dispersion::DispersionMethod::Sampled)
                .witness(d.witness.witness())
        }
        "wce" | "diaphony" => {
            let tol = cli.tol.unwrap_or(DEFAULT_TOL);
            let rule = CubatureRule::equal_weight(points.clone())?;
            let (w, r) = if name == "wce" {
                (worst_case_error_w2r(&rule, args.r, tol)?, args.r)
            } else {
                (diaphony(&rule, tol)?, 1.0)
            };
            lines.push(format!("tail_bound {}", w.tail_bound));
            let mut row = ReportRow::new(name, w.value)
                .param("r", r)
                .param("tol", tol)
                .param("tail_bound", w.tail_bound)
                .param("tail_dominated", w.tail_dominated)
                .exact(w.kmax.is_none());
            if let Some(k) = w.kmax {
                row = row.param("kmax", k);
            }
            row
        }
        other => return Err(usage(format!("unknown metric {other}"))),
    };
    let row = row.param("input_count", m).param("dim", points.dim());
    Ok((row, lines))
}

fn cmd_metric(cli: &Cli, args: &MetricArgs, out: &mut dyn Write) -> Result<()> {
    let points = read_points_file(&args.input)?;
    let (row, lines) = evaluate_metric(cli, args, &points)?;
    if args.metric == "dispersion" {
        writeln!(out, "{} {}", row.value, row.value * points.len() as f64)?;
    } else {
        writeln!(out, "{}", row.value)?;
        for l in &lines {
            writeln!(out, "{l}")?;
        }
    }
    if let Some(path) = &cli.output {
        ReportWriter::append(path)?.write(&row)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Rate,
    Dispersion,
    Universality,
    Greedy,
}

/// A parsed experiment config.
///
/// The file is `key = value` lines; `#` starts a comment. Keys:
/// `experiment` (rate, dispersion, universality, greedy), `family`, `d`,
/// `r`, `sizes`, `seeds`, `tol`, `c`, `trials`. Lists are comma-separated
/// or inclusive ranges `a..b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub family: Option<Family>,
    pub order: f64,
    pub sizes: Vec<u64>,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub c_scan: Vec<usize>,
    pub trials: usize,
}

fn parse_list(text: &str) -> std::result::Result<Vec<u64>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
        if a > b {
            return Err(format!("empty range {text}"));
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad integer {t:?}")))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut family_name = None;
        let mut family_line = 0;
        let mut d = 2usize;
        let mut order = 1.0;
        let mut sizes = None;
        let mut seeds = Vec::new();
        let mut tol = DEFAULT_TOL;
        let mut c_scan = Vec::new();
        let mut trials = 100usize;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| Error::Parse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("bad number {v:?}")));
            match key {
                "experiment" => {
                    kind = Some(match value {
                        "rate" => ExperimentKind::Rate,
                        "dispersion" => ExperimentKind::Dispersion,
                        "universality" => ExperimentKind::Universality,
                        "greedy" => ExperimentKind::Greedy,
                        other => return Err(err(format!("unknown experiment {other:?}"))),
                    })
                }
                "family" => {
                    family_name = Some(value.to_string());
                    family_line = line;
                }
                "d" => d = value.parse().map_err(|_| err(format!("bad dimension {value:?}")))?,
                "r" => order = num(value)?,
                "tol" => tol = num(value)?,
                "trials" => trials = value.parse().map_err(|_| err(format!("bad trial count {value:?}")))?,
                "sizes" => sizes = Some(parse_list(value).map_err(err)?),
                "seeds" => seeds = parse_list(value).map_err(err)?,
                "c" => c_scan = parse_list(value).map_err(err)?.into_iter().map(|c| c as usize).collect(),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let end = text.lines().count().max(1);
        let missing = |what: &str| Error::Parse {
            line: end,
            msg: format!("missing {what}"),
        };
        let kind = kind.ok_or_else(|| missing("experiment"))?;
        let sizes = sizes.ok_or_else(|| missing("sizes"))?;
        let family = match family_name {
            Some(name) => Some(Family::parse(&name, d).map_err(|e| Error::Parse {
                line: family_line,
                msg: e.to_string(),
            })?),
            None if kind == ExperimentKind::Greedy => None,
            None => return Err(missing("family")),
        };
        let randomized = family.is_some_and(|f| f.is_random()) || kind == ExperimentKind::Universality;
        if randomized && seeds.is_empty() {
            return Err(missing("seeds (this experiment is randomized)"));
        }
        if kind == ExperimentKind::Universality && c_scan.is_empty() {
            return Err(missing("c"));
        }
        if !(tol > 0.0) {
            return Err(missing("a positive tol"));
        }
        Ok(Self {
            kind,
            family,
            order,
            sizes,
            seeds,
            tol,
            c_scan,
            trials,
        })
    }
}

/// One CSV line: `family,size,metric,value,slope`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub family: String,
    pub size: u64,
    pub metric: String,
    pub value: f64,
    pub slope: Option<f64>,
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let mut text = String::from("family,size,metric,value,slope\n");
    for r in rows {
        let slope = r.slope.map(|s| s.to_string()).unwrap_or_default();
        writeln!(text, "{},{},{},{},{}", r.family, r.size, r.metric, r.value, slope).expect("write to String");
    }
    fs::write(path, text)?;
    Ok(())
}

/// Runs an experiment, appending report rows as they complete and writing
/// the CSV summary at the end. When a size fails, the rows already done are
/// kept, a `failure` row is appended and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, report: &Path, csv: &Path) -> Result<Vec<CsvRow>> {
    let mut writer = ReportWriter::create(report)?;
    let family_name = cfg.family.map_or("greedy", |f| f.name()).to_string();
    let mut rows: Vec<CsvRow> = Vec::new();
    // (x, value) pairs of the rows entering the final slope fit.
    let mut fit_points: Vec<(f64, f64)> = Vec::new();
    let mut failure = None;

    for &size in &cfg.sizes {
        let result = experiment_size(cfg, size);
        match result {
            Ok(done) => {
                for (row, csv_row, x) in done {
                    writer.write(&row.param("family", family_name.as_str()).param("size", size))?;
                    if let Some(x) = x {
                        fit_points.push((x, csv_row.value));
                    }
                    rows.push(csv_row);
                }
            }
            Err(e) => {
                let row = ReportRow::new("failure", 0.0)
                    .param("family", family_name.as_str())
                    .param("size", size)
                    .param("error", e.to_string());
                writer.write(&row)?;
                failure = Some(e);
                break;
            }
        }
    }
    if failure.is_none() && fit_points.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = fit_points.iter().copied().unzip();
        let fit = loglog_fit(&x, &y)?;
        if let Some(last) = rows.last_mut() {
            last.slope = Some(fit.slope);
        }
        let metric = rows.last().map(|r| r.metric.clone()).unwrap_or_default();
        let mut row = ReportRow::new(format!("{metric}_slope"), fit.slope)
            .param("family", family_name.as_str())
            .param("intercept", fit.intercept)
            .param("max_abs_residual", fit.max_abs_residual());
        if let Some(&s) = cfg.seeds.first() {
            row = row.seed(s);
        }
        writer.write(&row)?;
    }
    write_csv(&rows, csv)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

type SizeRows = Vec<(ReportRow, CsvRow, Option<f64>)>;

fn experiment_size(cfg: &ExperimentConfig, size: u64) -> Result<SizeRows> {
    let family_name = cfg.family.map_or("greedy", |f| f.name()).to_string();
    let csv = |metric: &str, value: f64| CsvRow {
        family: family_name.clone(),
        size,
        metric: metric.to_string(),
        value,
        slope: None,
    };
    match cfg.kind {
        ExperimentKind::Rate => {
            let family = cfg.family.expect("validated");
            let r = rate_row(family, cfg.order, size, &cfg.seeds, cfg.tol)?;
            let mut row = ReportRow::new("wce", r.value)
                .param("r", cfg.order)
                .param("tol", cfg.tol)
                .param("cardinality", r.cardinality);
            if family.is_random() {
                row = row.param("seeds", cfg.seeds.clone()).param("aggregate", "rms");
            }
            Ok(vec![(row, csv("wce", r.value), Some(r.cardinality as f64))])
        }
        ExperimentKind::Dispersion => {
            let family = cfg.family.expect("validated");
            let s = cfg.seeds.first().copied().unwrap_or(0);
            let r = dispersion_row(family, size, s)?;
            let mut row = ReportRow::new("dispersion", r.value)
                .param("cardinality", r.cardinality)
                .param("scaled", r.scaled)
                .exact(true);
            if family.is_random() {
                row = row.seed(s);
            }
            Ok(vec![(row, csv("dispersion", r.value), Some(r.cardinality as f64))])
        }
        ExperimentKind::Universality => {
            let family = cfg.family.expect("validated");
            let s = cfg.seeds[0];
            let points = family.points(size, s)?;
            let table = universality_vs_dispersion(&points, &cfg.c_scan, &LinfOptions::new(cfg.trials, s))?;
            Ok(table
                .into_iter()
                .map(|t| {
                    let metric = format!("c1_hat(c={})", t.c);
                    let row = ReportRow::new("c1_hat", t.ratio)
                        .param("c", t.c)
                        .param("n", t.n)
                        .param("trials", cfg.trials)
                        .param("scaled_dispersion", t.scaled_dispersion)
                        .witness(t.witness)
                        .seed(s);
                    (row, csv(&metric, t.ratio), None)
                })
                .collect())
        }
        ExperimentKind::Greedy => {
            let order = integer_order(cfg.order)?;
            let kernel = GreedyKernel::hat(order, 0.1)?;
            let space = DiscretizedSpace::tensor_grid(1, 256, 2.0)?;
            let candidates = halton_set(1024, 1)?;
            let g = greedy_cubature(|x, y| kernel.eval(x, y), &candidates, &space, size as usize, 1.0)?;
            let row = ReportRow::new("greedy_discrepancy", g.discrepancy)
                .param("r", order)
                .param("beta", g.trace.beta)
                .param("normalization", g.normalization);
            Ok(vec![(row, csv("greedy_discrepancy", g.discrepancy), Some(size as f64))])
        }
    }
}

fn cmd_experiment(cli: &Cli, args: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let report = cli.output.clone().unwrap_or_else(|| args.config.with_extension("jsonl"));
    let csv = args.csv.clone().unwrap_or_else(|| report.with_extension("csv"));
    let rows = run_experiment(&cfg, &report, &csv)?;
    for r in &rows {
        match r.slope {
            Some(s) => writeln!(out, "{} {} {} {} slope={}", r.family, r.size, r.metric, r.value, s)?,
            None => writeln!(out, "{} {} {} {}", r.family, r.size, r.metric, r.value)?,
        }
    }
    Ok(())
}

fn parse_intervals(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|part| {
            let (a, b) = part.split_once(':').ok_or_else(|| usage(format!("bad interval {part:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number {s:?}")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn cmd_greedy(cli: &Cli, args: &GreedyArgs, out: &mut dyn Write) -> Result<()> {
    let kernel = match args.kernel.as_str() {
        "hat" => GreedyKernel::hat(args.r, args.width)?,
        "indicator" => GreedyKernel::indicator(parse_intervals(&args.intervals)?)?,
        other => return Err(usage(format!("unknown kernel {other}"))),
    };
    let space = DiscretizedSpace::tensor_grid(args.d, args.grid, args.p)?;
    let candidates = halton_set(args.candidates, args.d)?;
    let g = greedy_cubature(|x, y| kernel.eval(x, y), &candidates, &space, args.m, args.beta)?;
    writeln!(out, "discrepancy {}", g.discrepancy)?;
    writeln!(out, "normalization {}", g.normalization)?;
    writeln!(out, "beta {}", g.trace.beta)?;
    if let Some(path) = &cli.output {
        g.trace.write_jsonl(std::io::BufWriter::new(fs::File::create(path)?))?;
    }
    Ok(())
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    parse_list(text).map(|v| v.into_iter().map(|x| x as usize).collect()).map_err(usage)
}

fn cmd_universal(cli: &Cli, sub: &UniversalCommand, out: &mut dyn Write) -> Result<()> {
    let row = match sub {
        UniversalCommand::Linf {
            input,
            n,
            trials,
            oversample,
            zero_force,
        } => {
            let s = seed(cli, "universal linf")?;
            let points = read_points_file(input)?;
            let opts = LinfOptions {
                trials: *trials,
                seed: s,
                oversample: *oversample,
                zero_force: *zero_force,
            };
            let check = universal_linf_check(&points, *n, &opts)?;
            writeln!(out, "{}", check.ratio)?;
            writeln!(out, "witness {}", serde_json::to_string(&check.witness)?)?;
            ReportRow::new("c1_hat", check.ratio)
                .param("n", *n)
                .param("trials", *trials)
                .param("oversample", *oversample)
                .param("zero_force", *zero_force)
                .witness(check.witness)
                .seed(s)
        }
        UniversalCommand::Scan { input, c, trials } => {
            let s = seed(cli, "universal scan")?;
            let points = read_points_file(input)?;
            let table = universality_vs_dispersion(&points, &parse_usize_list(c)?, &LinfOptions::new(*trials, s))?;
            let mut writer = cli.output.as_ref().map(ReportWriter::append).transpose()?;
            for t in &table {
                writeln!(out, "c={} n={} c1_hat={} scaled_dispersion={}", t.c, t.n, t.ratio, t.scaled_dispersion)?;
                if let Some(w) = writer.as_mut() {
                    w.write(
                        &ReportRow::new("c1_hat", t.ratio)
                            .param("c", t.c)
                            .param("n", t.n)
                            .param("trials", *trials)
                            .param("scaled_dispersion", t.scaled_dispersion)
                            .witness(t.witness.clone())
                            .seed(s),
                    )?;
                }
            }
            return Ok(());
        }
        UniversalCommand::Gram { input, s } => {
            let points = read_points_file(input)?;
            let b = FrequencyBox::new(parse_usize_list(s)?)?;
            let (lo, hi) = marcinkiewicz_l2_bounds(&b.frequencies(), &points)?;
            writeln!(out, "{lo} {hi}")?;
            ReportRow::new("gram_min", lo)
                .param("gram_max", hi)
                .param("s", b.s().to_vec())
                .exact(true)
        }
        UniversalCommand::Sparse { v, n, d, m, trials } => {
            let s = seed(cli, "universal sparse")?;
            let p = sparse_collection_probe(*v, *n, *d, *m, *trials, s)?;
            writeln!(out, "worst_c1 {} worst_c2 {} median_c1 {}", p.worst_c1, p.worst_c2, p.median_c1)?;
            ReportRow::new("sparse_c1", p.worst_c1)
                .param("worst_c2", p.worst_c2)
                .param("median_c1", p.median_c1)
                .param("v", *v)
                .param("n", *n)
                .param("d", *d)
                .param("m", *m)
                .param("trials", *trials)
                .witness(Witness::None)
                .seed(s)
        }
    };
    if let Some(path) = &cli.output {
        ReportWriter::append(path)?.write(&row)?;
    }
    Ok(())
}

/// Exit status of an error: 2 for usage and config errors, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}
