use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ppflow::harness::cli;

#[derive(Parser)]
#[command(name = "ppflow", version, about = "Parabolic flow of (p,p)-forms on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow described by a TOML configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample the pointwise algebraic properties.
    CheckLemmas {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a run report as text.
    Report {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out_dir,
            threads,
            seed,
        } => cli::configure_threads(threads)
            .and_then(|_| cli::cli_run(&config, &out_dir, seed))
            .map(|r| {
                println!(
                    "converged: b = {:.12e}, residual = {:.3e}, t = {}",
                    r.b, r.final_residual, r.t_end
                );
                true
            }),
        Command::CheckLemmas { n, p, samples, seed } => {
            cli::configure_threads(None).and_then(|_| cli::cli_check_lemmas(n, p, samples, seed)).map(|rep| {
                for o in &rep.outcomes {
                    println!("{}", o.line());
                }
                rep.all_passed()
            })
        }
        Command::Report { report, out } => cli::cli_report(&report, out.as_deref()).map(|text| {
            if out.is_none() {
                print!("{text}");
            }
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
