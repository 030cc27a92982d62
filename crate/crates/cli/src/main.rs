use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cauchy_omega::ScalarMode;
use cauchy_omega_cli::{
    cmd_cond, cmd_gen, cmd_lyapunov, cmd_map, cmd_verify, CheckList, CliError, GenParams, Output,
    OutputFormat, Range, RunConfig, Status,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cauchy-omega",
    version,
    about = "Spectral map of weighted Cauchy matrices, with structural verification"
)]
struct Cli {
    /// Scalar arithmetic: f64 or dd (double-double)
    #[arg(long, global = true, default_value = "f64")]
    mode: ScalarMode,
    /// Multiplier applied to every default tolerance
    #[arg(long = "tol-scale", global = true, default_value_t = 1.0)]
    tol_scale: f64,
    /// Write data here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: json or csv (csv is for verify)
    #[arg(long, global = true, default_value = "json")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Ω(a, A) = (b, B) with U and diagnostics
    Map { input: PathBuf },
    /// Run verification checks on an instance file or a directory of them
    Verify {
        input: PathBuf,
        /// Comma-separated groups (involution, scaling, identities,
        /// conjugation, displacement, cyclicity, moments) or `all`
        #[arg(long, default_value = "all")]
        checks: CheckList,
        /// Node scale t of the scaling check
        #[arg(long = "node-scale", default_value_t = 2.0)]
        node_scale: f64,
        /// Weight scale s of the scaling check
        #[arg(long = "weight-scale", default_value_t = 5.0)]
        weight_scale: f64,
    },
    /// Generate a seeded random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "node-range", default_value = "1,10")]
        node_range: Range,
        #[arg(long = "weight-range", default_value = "0.1,10")]
        weight_range: Range,
        /// Minimum relative gap between consecutive nodes
        #[arg(long = "min-gap", default_value_t = 0.05)]
        min_gap: f64,
    },
    /// Report κ = b_N/b_1 and the recommended scalar mode
    Cond { input: PathBuf },
    /// Solve XY + YX = K
    Lyapunov {
        x: PathBuf,
        k: PathBuf,
        /// Cross-check against the integral representation
        #[arg(long)]
        oracle: bool,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let seed = match cli.command {
        Command::Gen { seed, .. } => seed,
        _ => 0,
    };
    let cfg = RunConfig::new(cli.mode, cli.tol_scale, seed, cli.format)?;
    let out = match &cli.command {
        Command::Map { input } => cmd_map(input, &cfg)?,
        Command::Verify {
            input,
            checks,
            node_scale,
            weight_scale,
        } => cmd_verify(input, checks, *node_scale, *weight_scale, &cfg)?,
        Command::Gen {
            n,
            node_range,
            weight_range,
            min_gap,
            ..
        } => {
            let params = GenParams {
                n: *n,
                node_range: *node_range,
                weight_range: *weight_range,
                min_gap: *min_gap,
            };
            cmd_gen(&params, &cfg)?
        }
        Command::Cond { input } => cmd_cond(input, &cfg)?,
        Command::Lyapunov { x, k, oracle } => cmd_lyapunov(x, k, *oracle, &cfg)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, &out.text).map_err(|e| CliError::io(path, &e))?,
        None => std::io::stdout()
            .write_all(out.text.as_bytes())
            .map_err(|e| CliError::new(Status::Io, format!("stdout: {e}")))?,
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("{note}");
            }
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
