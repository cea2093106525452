use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memodyn_cli::{
    cmd_analyze, cmd_equivalent, cmd_netlist, cmd_simulate, cmd_sweep, cmd_verify, config_for, CliResult, RunConfig,
};

#[derive(Parser)]
#[command(name = "memodyn", version, about = "Memristive oscillator toolkit")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; reports go to stdout without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write whitespace separated columns to `<out>.dat` (default t,x,y,z,w).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "t,x,y,z,w")]
    plot_cols: Option<String>,
    /// Sweep workers; 0 uses every core.
    #[arg(long, global = true, env = "MEMODYN_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for random sweep samples, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a circuit and write the trajectory CSV and manifest.
    Simulate,
    /// Period, MMO signature and loop integrals of a trajectory.
    Analyze { csv: PathBuf },
    /// Residuals of the force laws, jounce equations and reconstructions.
    Verify { csv: PathBuf },
    /// G-C and R-L equivalents of one period given as t,v,i.
    Equivalent { csv: PathBuf },
    /// SPICE deck of the op-amp realization.
    Netlist,
    /// Simulate and analyze a grid of parameter points.
    Sweep,
}

fn base_config(cli: &Cli) -> CliResult<RunConfig> {
    match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate => {
            cmd_simulate(&base_config(cli)?, out, cli.plot_cols.as_deref())?;
        }
        Command::Analyze { csv } => {
            cmd_analyze(csv, &config_for(csv, cli.config.as_deref())?, out)?;
        }
        Command::Verify { csv } => {
            cmd_verify(csv, &config_for(csv, cli.config.as_deref())?, out)?;
        }
        Command::Equivalent { csv } => {
            cmd_equivalent(csv, out)?;
        }
        Command::Netlist => {
            cmd_netlist(&base_config(cli)?, out)?;
        }
        Command::Sweep => {
            cmd_sweep(&base_config(cli)?, out, cli.threads, cli.seed)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("memodyn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
