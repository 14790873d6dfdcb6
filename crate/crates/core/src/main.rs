use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use knot_morse::cli::{
    cmd_analyze, cmd_critical, cmd_perturb, cmd_surfaces, critical_table, surfaces_table, CliError,
    EXIT_CONFIG,
};

/// Critical points, equipotential surfaces and Morse codes of charged knots.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: report, meshes, Morse code and verification.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Directory for report.json and meshes/, overriding [output].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_mesh: bool,
    },
    /// Print the critical points and their clusters.
    Critical {
        #[arg(long)]
        config: PathBuf,
    },
    /// Extract the surfaces at the given levels.
    Surfaces {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        levels: Vec<f64>,
        /// Directory for the OBJ files, overriding [output].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_mesh: bool,
    },
    /// Write a configuration for a randomly perturbed copy of the knot.
    Perturb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        amplitude: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory for the new configuration; printed to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Analyze { config, out, no_mesh } => {
            let outcome = cmd_analyze(&config, out.as_deref(), no_mesh)?;
            let report = &outcome.report;
            println!("Morse code {}", report.morse_code);
            for check in &report.verification.checks {
                let status = match (check.applicable, check.passed) {
                    (false, _) => "n/a ",
                    (true, true) => "pass",
                    (true, false) => "FAIL",
                };
                println!("  {status} {:<16} {}", check.name, check.details);
            }
            println!("report written to {}", outcome.report_path.display());
            Ok(outcome.exit_code())
        }
        Command::Critical { config } => {
            print!("{}", critical_table(&cmd_critical(&config)?));
            Ok(0)
        }
        Command::Surfaces {
            config,
            levels,
            out,
            no_mesh,
        } => {
            let outcome = cmd_surfaces(&config, &levels, out.as_deref(), no_mesh)?;
            print!("{}", surfaces_table(&outcome.surfaces));
            for p in &outcome.mesh_paths {
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
        Command::Perturb {
            config,
            amplitude,
            seed,
            out,
        } => {
            let outcome = cmd_perturb(&config, amplitude, seed, out.as_deref())?;
            match outcome.path {
                Some(p) => println!("wrote {}", p.display()),
                None => print!("{}", outcome.text),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads {n}: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
