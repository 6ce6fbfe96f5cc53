use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use lidar_cfe::scan::{DEFAULT_MAX_RANGE, DEFAULT_RAYS};
use lidar_cfe_cli::commands::{self, ExplainArgs};
use lidar_cfe_cli::model_spec::{parse_model, ModelShape, ModelSpec};
use lidar_cfe_cli::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "lidar-cfe", version, about = "Counterfactual explanations for LiDAR-driven policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Raycast a scenario into a base scan and plot it.
    Scan {
        scenario: PathBuf,
        /// Output directory (default: $LIDAR_CFE_OUT, then ./lidar-cfe-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for counterfactual obstacle sets for a query.
    Explain {
        query: PathBuf,
        /// scripted:<name>, weights:<path>, or exec:<command>.
        #[arg(long, value_parser = parse_model_arg)]
        model: ModelSpec,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 runs everything on the calling thread.
        #[arg(long)]
        workers: Option<usize>,
        /// Override a query or GA parameter, e.g. `--set ga.generations=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Per-call timeout for exec: models.
        #[arg(long, default_value_t = 5000)]
        timeout_ms: u64,
        #[arg(long)]
        no_plots: bool,
    },
    /// Load a model, check its shape, and probe it once.
    ValidateModel {
        #[arg(long, value_parser = parse_model_arg)]
        model: ModelSpec,
        /// Scan length for scripted and exec: models.
        #[arg(long, default_value_t = DEFAULT_RAYS)]
        n_rays: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_RANGE)]
        max_range: f64,
        /// Output count for exec: models.
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        #[arg(long, default_value_t = 5000)]
        timeout_ms: u64,
    },
}

fn parse_model_arg(s: &str) -> Result<ModelSpec, String> {
    parse_model(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Scan { scenario, out } => {
            let out = commands::output_dir(out);
            let written = commands::scan(&scenario, &out)?;
            println!("scan: {}", written.scan_file.display());
            println!("plot: {}", written.plot_file.display());
        }
        Command::Explain { query, model, seed, out, workers, overrides, timeout_ms, no_plots } => {
            let args = ExplainArgs {
                query,
                model,
                seed,
                out: commands::output_dir(out),
                workers,
                overrides,
                timeout: Duration::from_millis(timeout_ms),
                plots: !no_plots,
                command: std::env::args().collect(),
            };
            let done = commands::explain(&args)?;
            let r = &done.results;
            println!("{} of {} counterfactuals satisfied in {:.2} s", r.satisfied, r.requested, done.duration.as_secs_f64());
            if let Some(w) = &r.warning {
                println!("warning: {w}");
            }
            println!("results: {}", done.results_file.display());
            println!("manifest: {}", done.manifest_file.display());
        }
        Command::ValidateModel { model, n_rays, max_range, outputs, timeout_ms } => {
            if n_rays == 0 || max_range.is_nan() || max_range <= 0.0 {
                return Err(CliError::Input("n_rays and max_range must be positive".into()));
            }
            let shape = ModelShape { n_rays, max_range, outputs, timeout: Duration::from_millis(timeout_ms) };
            println!("{}", commands::validate_model(&model, shape)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
