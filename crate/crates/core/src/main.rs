use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gyrovp::app::commands::{self, RunSummary};
use gyrovp::app::config::{parse_eps_list, RunConfig};
use gyrovp::app::io::DiagWriter;
use gyrovp::diagnostics::TrajectoryMetric;
use gyrovp::Error;

/// Particle solver for the gyro-averaged Vlasov-Poisson system and its
/// strongly magnetized parent model.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the gyro-averaged limit model.
    RunLimit(RunArgs),
    /// Integrate the full model by split stepping.
    RunFull(RunArgs),
    /// Sweep ε and measure the distance between the filtered full model
    /// and the limit model. Exits 1 unless the error strictly decreases.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated, strictly decreasing ε values.
        #[arg(long)]
        eps: String,
        /// Use the worst particle instead of the weighted RMS.
        #[arg(long)]
        sup: bool,
        /// Switch the electric field off in the full model.
        #[arg(long)]
        free_gyration: bool,
    },
    /// Check the closed-form kernel against its defining circle average.
    VerifyKernel {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quiet: bool,
    },
    /// Print conserved quantities of stored snapshots as diag.csv rows.
    Diagnose {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `run.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Verification(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, PathBuf), Failure> {
    let cfg = RunConfig::load(&args.config)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| cfg.run.output_dir.clone());
    Ok((cfg, out))
}

fn report(s: &RunSummary, quiet: bool) {
    if quiet {
        return;
    }
    let d = &s.max_drift;
    println!(
        "{} particles, {} snapshots written to {}",
        s.particles,
        s.snapshots,
        s.out_dir.display()
    );
    println!(
        "max relative drift: mass {:.3e}  mean_pos {:.3e}  mean_vel {:.3e}  pos_sq {:.3e}  vel_sq {:.3e}  electric {:.3e}",
        d.mass, d.mean_pos, d.mean_vel, d.pos_sq, d.vel_sq, d.electric
    );
}

fn write_table(dir: &Path, table: &str) -> Result<(), Error> {
    let path = dir.join("compare.csv");
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, table))
        .map_err(|source| Error::Io { path, source })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::RunLimit(args) => {
            let (cfg, out) = load(&args)?;
            report(&commands::run_limit(&cfg, &out)?, args.quiet);
        }
        Command::RunFull(args) => {
            let (cfg, out) = load(&args)?;
            report(&commands::run_full(&cfg, &out)?, args.quiet);
        }
        Command::Compare {
            run,
            eps,
            sup,
            free_gyration,
        } => {
            let eps = parse_eps_list(&eps).map_err(Error::from)?;
            let mut cfg = RunConfig::load(&run.config)?;
            if free_gyration {
                cfg.split.field_enabled = false;
            }
            let metric = if sup {
                TrajectoryMetric::Sup
            } else {
                TrajectoryMetric::Rms
            };
            let result = commands::compare(&cfg, &eps, metric)?;
            let table = result.table();
            print!("{table}");
            if let Some(dir) = &run.out {
                write_table(dir, &table)?;
            }
            if !result.strictly_decreasing() {
                return Err(Failure::Verification(
                    "trajectory error does not decrease strictly with ε".into(),
                ));
            }
        }
        Command::VerifyKernel {
            samples,
            nodes,
            tol,
            seed,
            quiet,
        } => {
            if samples == 0 {
                eprintln!("warning: no samples requested; nothing to verify");
                return Ok(());
            }
            let r = commands::verify_kernel(samples, nodes, seed)?;
            if !quiet {
                println!(
                    "samples {}  max error {:.3e}  mean error {:.3e}  tolerance {:.1e}",
                    r.samples, r.max_error, r.mean_error, tol
                );
            }
            if !(r.max_error <= tol) {
                return Err(Failure::Verification(format!(
                    "max kernel error {:.3e} exceeds {tol:e}",
                    r.max_error
                )));
            }
        }
        Command::Diagnose { snapshots } => {
            let rows = commands::diagnose(&snapshots)?;
            let mut out = DiagWriter::new(std::io::stdout().lock(), Path::new("<stdout>"))?;
            for r in &rows {
                out.write(r)?;
            }
            out.finish()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
