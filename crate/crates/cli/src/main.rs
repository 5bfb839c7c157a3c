use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdtc_cli::{CliError, Config};

#[derive(Parser)]
#[command(name = "pdtc", version, about = "Two-frequency driven dipolar spin simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides output.workers).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Replaces every seed in the config with values derived from this one.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the spin graph and write graph.txt.
    Graph,
    /// Run the single protocol point from [protocol].
    Run,
    /// Run the Cartesian sweep grid from [sweep].
    Sweep,
    /// Recompute lifetimes, spectra, heatmaps and fits from stored series.
    Analyze,
    /// Run the invariant battery against the dense oracle.
    Verify,
}

fn load(cli: &Cli) -> Result<(Config, PathBuf), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let mut config = Config::parse(&text)?;
    if let Some(s) = cli.seed_override {
        config.override_seeds(s);
    }
    if let Some(w) = cli.workers {
        config.output.workers = w;
    }
    if let Some(out) = &cli.out {
        config.output.dir = Some(out.clone());
    }
    config.validate()?;
    let out = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("pdtc-out"));
    Ok((config, out))
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify => {
            let (report, ok) = pdtc_cli::verify();
            println!("{report}");
            Ok(if ok { 0 } else { 1 })
        }
        Command::Graph => {
            let (config, out) = load(cli)?;
            let setup = pdtc_cli::generate_graph(&config, &out)?;
            println!("wrote {}", out.join("graph.txt").display());
            println!("spins {}", setup.couplings.spins());
            println!("median_coupling {:e}", setup.couplings.median());
            if let Some(j) = setup.scale {
                println!("coupling_scale {j:e}");
            }
            Ok(0)
        }
        Command::Run | Command::Sweep => {
            let (config, out) = load(cli)?;
            let outcome = pdtc_cli::execute(&config, &out, matches!(cli.command, Command::Sweep))?;
            println!("{} cells, {} failed, outputs in {}", outcome.cells, outcome.failed.len(), out.display());
            for (i, reason) in &outcome.failed {
                eprintln!("cell {i}: {reason}");
            }
            Ok(outcome.exit_code())
        }
        Command::Analyze => {
            let out = cli
                .out
                .clone()
                .ok_or_else(|| CliError::Config("analyze needs --out pointing at a finished run".into()))?;
            let analysis = match &cli.config {
                Some(_) => Some(load(cli)?.0),
                None => None,
            };
            let outcome = pdtc_cli::analyze(&out, analysis.as_ref())?;
            println!("reanalyzed {} cells in {}", outcome.cells, out.display());
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
