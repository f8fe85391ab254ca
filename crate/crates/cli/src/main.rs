use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use molab::{parse_config, run, RunError, EXIT_ERROR};

/// Runs one molab experiment from a config file.
#[derive(Debug, Parser)]
#[command(name = "molab", version)]
struct Cli {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV, JSON and SVG artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write a log-log SVG plot.
    #[arg(long)]
    plot: bool,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn execute(cli: &Cli) -> Result<i32, RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|source| RunError::Io { path: cli.config.clone(), source })?;
    let cfg = parse_config(&text).map_err(RunError::Config)?;
    let outcome = run(&cfg, cli.plot)?;
    for path in outcome.write(&cfg, &cli.out)? {
        eprintln!("wrote {}", path.display());
    }
    println!("{}", outcome.status.as_str());
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let code = pool.install(|| match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    });
    ExitCode::from(code as u8)
}
