//! Run an experiment config end to end and print the CSV it produces.

use qmc_quality::harness::{run_experiment, ExperimentConfig};
use qmc_quality::Result;

const CONFIG: &str = "\
# worst-case error rate for Fibonacci lattices
experiment = rate
family = fibonacci
r = 2
sizes = 6..12
";

fn main() -> Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join(format!("qmcq-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (report, csv) = (dir.join("report.jsonl"), dir.join("rate.csv"));
    run_experiment(&cfg, &report, &csv)?;
    print!("{}", std::fs::read_to_string(&csv)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
