use std::process::ExitCode;

use clap::Parser;
use qmc_quality::harness::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qmcq: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmcq: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
